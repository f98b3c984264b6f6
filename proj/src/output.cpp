#include "qdsim/output.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <system_error>

#include "qdsim/errors.hpp"

namespace qdsim {

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) out << std::setw(2) << static_cast<int>(digest[i]);
  return out.str();
}

std::string probabilities_csv(const std::vector<double>& times, const std::vector<std::vector<double>>& probs,
                              const std::string& prefix) {
  std::ostringstream out;
  out.precision(12);
  const std::size_t n = probs.empty() ? 0 : probs.front().size();
  out << 't';
  for (std::size_t i = 1; i <= n; ++i) out << ',' << prefix << i;
  out << '\n';
  for (std::size_t r = 0; r < times.size(); ++r) {
    out << times[r];
    for (double p : probs[r]) out << ',' << p;
    out << '\n';
  }
  return out.str();
}

std::string heatmap_csv(const std::vector<double>& times, const std::vector<double>& xs,
                        const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  out.precision(10);
  out << 't';
  for (double x : xs) out << ',' << x;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << times[r];
    for (double v : rows[r]) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

namespace {

constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double left = 60;
  double right = 20;
  double top = 30;
  double bottom = 45;
  double w = 0;
  double h = 0;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (w - left - right); }
  double py(double y) const { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); }
};

void axes(std::ostringstream& out, const Frame& f, const PlotLayout& layout) {
  out << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << f.w - f.left - f.right << "\" height=\""
      << f.h - f.top - f.bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    out << "<text x=\"" << f.px(xv) << "\" y=\"" << f.h - f.bottom + 15
        << "\" font-size=\"11\" text-anchor=\"middle\">" << std::setprecision(3) << xv << "</text>\n";
    out << "<text x=\"" << f.left - 5 << "\" y=\"" << f.py(yv) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
        << std::setprecision(3) << yv << "</text>\n";
  }
  out << "<text x=\"" << f.w / 2 << "\" y=\"18\" font-size=\"14\" text-anchor=\"middle\">" << escape(layout.title)
      << "</text>\n";
  out << "<text x=\"" << f.w / 2 << "\" y=\"" << f.h - 8 << "\" font-size=\"12\" text-anchor=\"middle\">"
      << escape(layout.x_label) << "</text>\n";
  out << "<text x=\"14\" y=\"" << f.h / 2 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << f.h / 2 << ")\">" << escape(layout.y_label) << "</text>\n";
}

void header(std::ostringstream& out, const PlotLayout& layout) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << layout.width << "\" height=\"" << layout.height
      << "\" viewBox=\"0 0 " << layout.width << ' ' << layout.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string svg_lines(const std::vector<PlotSeries>& series, const PlotLayout& layout) {
  Frame f;
  f.w = layout.width;
  f.h = layout.height;
  f.x0 = 1e300;
  f.x1 = -1e300;
  f.y0 = 1e300;
  f.y1 = -1e300;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double b = s.band.empty() ? 0.0 : s.band[i];
      f.x0 = std::min(f.x0, s.x[i]);
      f.x1 = std::max(f.x1, s.x[i]);
      f.y0 = std::min(f.y0, s.y[i] - b);
      f.y1 = std::max(f.y1, s.y[i] + b);
    }
  }
  if (!(f.x1 > f.x0)) { f.x0 = 0; f.x1 = 1; }
  if (!(f.y1 > f.y0)) { f.y0 -= 0.5; f.y1 += 0.5; }

  std::ostringstream out;
  out.precision(6);
  header(out, layout);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % kColors.size()];
    if (!s.band.empty()) {
      out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) out << f.px(s.x[i]) << ',' << f.py(s.y[i] + s.band[i]) << ' ';
      for (std::size_t i = s.x.size(); i-- > 0;) out << f.px(s.x[i]) << ',' << f.py(s.y[i] - s.band[i]) << ' ';
      out << "\"/>\n";
    }
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        out << "<circle cx=\"" << f.px(s.x[i]) << "\" cy=\"" << f.py(s.y[i]) << "\" r=\"2.5\" fill=\"none\" stroke=\""
            << color << "\"/>\n";
      }
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) out << f.px(s.x[i]) << ',' << f.py(s.y[i]) << ' ';
      out << "\"/>\n";
    }
    out << "<text x=\"" << f.w - f.right - 5 << "\" y=\"" << f.top + 15 + 14 * static_cast<double>(k)
        << "\" font-size=\"11\" text-anchor=\"end\" fill=\"" << color << "\">" << escape(s.label) << "</text>\n";
  }
  axes(out, f, layout);
  out << "</svg>\n";
  return out.str();
}

std::string svg_heatmap(const std::vector<double>& times, const std::vector<double>& xs,
                        const std::vector<std::vector<double>>& rows, const PlotLayout& layout) {
  Frame f;
  f.w = layout.width;
  f.h = layout.height;
  f.x0 = xs.empty() ? 0.0 : xs.front();
  f.x1 = xs.empty() ? 1.0 : xs.back();
  f.y0 = times.empty() ? 0.0 : times.front();
  f.y1 = times.size() < 2 ? f.y0 + 1.0 : times.back();
  if (!(f.x1 > f.x0)) f.x1 = f.x0 + 1.0;
  double vmax = 0.0;
  for (const auto& r : rows) for (double v : r) vmax = std::max(vmax, v);
  if (vmax <= 0.0) vmax = 1.0;

  // Coarsen to at most ~200 x 200 cells to keep the file small.
  const std::size_t nt = rows.size();
  const std::size_t nx = xs.size();
  const std::size_t st = std::max<std::size_t>(1, nt / 200);
  const std::size_t sx = std::max<std::size_t>(1, nx / 200);
  const double cw = (f.w - f.left - f.right) / std::ceil(static_cast<double>(nx) / static_cast<double>(sx));
  const double ch = (f.h - f.top - f.bottom) / std::ceil(static_cast<double>(nt) / static_cast<double>(st));

  std::ostringstream out;
  out.precision(6);
  header(out, layout);
  std::size_t row_cell = 0;
  for (std::size_t t = 0; t < nt; t += st, ++row_cell) {
    std::size_t col_cell = 0;
    for (std::size_t i = 0; i < nx; i += sx, ++col_cell) {
      double v = 0.0;
      for (std::size_t a = t; a < std::min(nt, t + st); ++a)
        for (std::size_t b = i; b < std::min(nx, i + sx); ++b) v = std::max(v, rows[a][b]);
      const int level = static_cast<int>(std::lround(255.0 * std::sqrt(v / vmax)));
      char color[8];
      std::snprintf(color, sizeof color, "#%02x%02x%02x", level, level / 3, 255 - level);
      out << "<rect x=\"" << f.left + static_cast<double>(col_cell) * cw << "\" y=\""
          << f.h - f.bottom - static_cast<double>(row_cell + 1) * ch << "\" width=\"" << cw + 0.5 << "\" height=\""
          << ch + 0.5 << "\" fill=\"" << color << "\"/>\n";
    }
  }
  axes(out, f, layout);
  out << "</svg>\n";
  return out.str();
}

}  // namespace qdsim
