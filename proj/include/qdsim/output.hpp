#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qdsim {

/// Writes through a temporary file in the same directory and renames it into
/// place. Errors name the path.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);

/// `t,p1..pN`
std::string probabilities_csv(const std::vector<double>& times, const std::vector<std::vector<double>>& probs,
                              const std::string& prefix = "p");

/// Header row `t,x_1..x_n`, then one row per time.
std::string heatmap_csv(const std::vector<double>& times, const std::vector<double>& xs,
                        const std::vector<std::vector<double>>& rows);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> band;  // optional half-widths, shaded around y
  bool markers = false;      // circles instead of a line
};

struct PlotLayout {
  int width = 800;
  int height = 500;
  std::string title;
  std::string x_label;
  std::string y_label;
};

std::string svg_lines(const std::vector<PlotSeries>& series, const PlotLayout& layout);

/// Rows are times (vertical axis), columns positions (horizontal axis).
std::string svg_heatmap(const std::vector<double>& times, const std::vector<double>& xs,
                        const std::vector<std::vector<double>>& rows, const PlotLayout& layout);

}  // namespace qdsim
