#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "errors.hpp"

namespace steklov {

inline std::vector<double> uniform_grid(std::size_t points, double a = 0.0,
                                        double b = 1.0) {
  if (points < 2) throw InvalidArgument("uniform_grid needs at least 2 points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
  g.back() = b;
  return g;
}

inline bool is_valid_unit_grid(const std::vector<double>& g) {
  if (g.size() < 2 || g.front() != 0.0 || g.back() != 1.0) return false;
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) return false;
  return true;
}

// Composite Simpson on an arbitrary increasing grid, panel pairs handled with
// the non-uniform three-point rule; an odd trailing panel uses the three-point
// rule restricted to its last interval.
inline double simpson(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t n = x.size();
  if (n != y.size()) throw InvalidArgument("simpson: size mismatch");
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * (x[1] - x[0]) * (y[0] + y[1]);
  double s = 0.0;
  std::size_t i = 0;
  for (; i + 2 < n; i += 2) {
    double h0 = x[i + 1] - x[i], h1 = x[i + 2] - x[i + 1];
    double hs = h0 + h1;
    s += hs / 6.0 *
         ((2.0 - h1 / h0) * y[i] + hs * hs / (h0 * h1) * y[i + 1] +
          (2.0 - h0 / h1) * y[i + 2]);
  }
  if (i + 1 < n) {
    double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
    double a = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
    double b = (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
    double c = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    s += a * y[i + 1] + b * y[i] - c * y[i - 1];
  }
  return s;
}

// Composite Simpson for a callable on [a, b] with an even panel count.
template <class F>
double simpson(F&& f, double a, double b, std::size_t panels) {
  if (panels % 2) ++panels;
  double h = (b - a) / static_cast<double>(panels);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < panels; ++i)
    s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return s * h / 3.0;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t samples = 0;
};

// Ordinary least squares y = slope*x + intercept; non-finite samples skipped.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    ++n;
  }
  if (n < 2) throw FitError("fit_line: fewer than two usable samples");
  double dn = static_cast<double>(n);
  double den = dn * sxx - sx * sx;
  if (den == 0.0) throw FitError("fit_line: degenerate abscissae");
  LineFit r;
  r.slope = (dn * sxy - sx * sy) / den;
  r.intercept = (sy - r.slope * sx) / dn;
  r.samples = n;
  return r;
}

inline double logsumexp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double t : v) m = std::max(m, t);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double t : v) s += std::exp(t - m);
  return m + std::log(s);
}

inline double rel_diff(double a, double b) {
  double s = std::max(std::fabs(a), std::fabs(b));
  return s == 0.0 ? 0.0 : std::fabs(a - b) / s;
}

}  // namespace steklov
