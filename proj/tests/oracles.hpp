#pragma once

// Reference computations that share no code with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

constexpr double pi = std::numbers::pi;

/// Adaptive Gauss-Kronrod over [a, b], split so each piece holds at most a
/// couple of oscillations of the integrand.
inline double integrate(const std::function<double(double)>& f, double a, double b, double max_wavenumber) {
  const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) * max_wavenumber / pi)));
  double sum = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double lo = a + (b - a) * p / pieces;
    const double hi = a + (b - a) * (p + 1) / pieces;
    sum += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 5, 1e-15);
  }
  return sum;
}

/// (2/L) int_a^b v(x) sin(k pi x/L) sin(m pi x/L) dx.
inline double sine_element(const std::function<double(double)>& v, double a, double b, int k, int m, double L) {
  const auto f = [&](double x) { return v(x) * std::sin(k * pi * x / L) * std::sin(m * pi * x / L); };
  return 2.0 / L * integrate(f, a, b, (k + m) * pi / L);
}

/// Bound levels of -psi'' + v psi = E psi on [0, L] with hard walls, v = 0 in
/// a centred well of width w and v = depth elsewhere. Matching the log
/// derivative of cos/sin inside to sinh towards the walls outside:
///   even: k sin(ka) - q coth(q b) cos(ka) = 0
///   odd:  k cos(ka) + q coth(q b) sin(ka) = 0
/// with a = w/2, b = (L - w)/2, k = sqrt(E), q = sqrt(depth - E).
inline std::vector<double> finite_well_levels(double depth, double w, double L) {
  const double a = 0.5 * w;
  const double b = 0.5 * (L - w);
  const auto even = [&](double E) {
    const double k = std::sqrt(E), q = std::sqrt(depth - E);
    return k * std::sin(k * a) - q / std::tanh(q * b) * std::cos(k * a);
  };
  const auto odd = [&](double E) {
    const double k = std::sqrt(E), q = std::sqrt(depth - E);
    return k * std::cos(k * a) + q / std::tanh(q * b) * std::sin(k * a);
  };
  std::vector<double> roots;
  for (const auto& f : {std::function<double(double)>(even), std::function<double(double)>(odd)}) {
    const int n = 200000;
    const double lo = 1e-12, hi = depth * (1.0 - 1e-12);
    double x0 = lo, f0 = f(lo);
    for (int i = 1; i <= n; ++i) {
      const double x1 = lo + (hi - lo) * i / n;
      const double f1 = f(x1);
      if ((f0 < 0) != (f1 < 0)) {
        double l = x0, r = x1, fl = f0;
        for (int it = 0; it < 200 && r - l > 1e-14; ++it) {
          const double mid = 0.5 * (l + r);
          const double fm = f(mid);
          if ((fm < 0) == (fl < 0)) {
            l = mid;
            fl = fm;
          } else {
            r = mid;
          }
        }
        roots.push_back(0.5 * (l + r));
      }
      x0 = x1;
      f0 = f1;
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// Classical RK4 for i/(2 pi) dC/dt = H(t) C.
inline Eigen::VectorXcd rk4(const std::function<Eigen::MatrixXd(double)>& H, Eigen::VectorXcd c, double t_end,
                            double h) {
  const std::complex<double> f(0.0, -2.0 * pi);
  const auto rhs = [&](double t, const Eigen::VectorXcd& y) -> Eigen::VectorXcd {
    return f * (H(t).cast<std::complex<double>>() * y);
  };
  const int n = static_cast<int>(std::ceil(t_end / h));
  const double dt = t_end / n;
  double t = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXcd k1 = rhs(t, c);
    const Eigen::VectorXcd k2 = rhs(t + dt / 2, c + dt / 2 * k1);
    const Eigen::VectorXcd k3 = rhs(t + dt / 2, c + dt / 2 * k2);
    const Eigen::VectorXcd k4 = rhs(t + dt, c + dt * k3);
    c += dt / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += dt;
  }
  return c;
}

/// Composite Simpson with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace oracle
