#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "jet.hpp"
#include "numerics.hpp"

namespace steklov {

// sum_i coeffs[i] x^i
struct PolyTerm {
  std::vector<double> coeffs;

  template <int N>
  Jet<N> jet(double x) const {
    Jet<N> r;
    std::vector<double> b = coeffs;
    // Repeated synthetic division yields the Taylor coefficients at x.
    for (int j = 0; j <= N && !b.empty(); ++j) {
      std::vector<double> q(b.size() > 1 ? b.size() - 1 : 0);
      double acc = 0.0;
      for (std::size_t i = b.size(); i-- > 0;) {
        acc = acc * x + b[i];
        if (i > 0) q[i - 1] = acc;
      }
      r.c[j] = acc;
      b = std::move(q);
    }
    return r;
  }
};

// amp * e^{rate x}
struct ExpTerm {
  double amp = 1.0, rate = 1.0;

  template <int N>
  Jet<N> jet(double x) const {
    Jet<N> r;
    double v = amp * std::exp(rate * x), p = 1.0;
    for (int j = 0; j <= N; ++j) {
      r.c[j] = v * p;
      p *= rate / (j + 1);
    }
    return r;
  }
};

// amp * exp(-(x - x0)^2 / sigma^2)
struct GaussTerm {
  double amp = 1.0, x0 = 0.5, sigma = 0.1;

  template <int N>
  Jet<N> jet(double x) const {
    Jet<N> u = Jet<N>::variable(x) - Jet<N>::constant(x0);
    return exp(u * u * (-1.0 / (sigma * sigma))) * amp;
  }
};

// amp * e * exp(-1/(1 - s^2)), s = 2(x - a)/w - 1; supported on [a, a + w],
// peak value amp at the centre.
struct BumpTerm {
  double amp = 1.0, a = 0.25, w = 0.05;

  template <int N>
  Jet<N> jet(double x) const {
    double s0 = 2.0 * (x - a) / w - 1.0;
    if (!(s0 > -1.0 && s0 < 1.0)) return {};
    if (-1.0 / (1.0 - s0 * s0) < -740.0) return {};
    Jet<N> s = Jet<N>::variable(x) * (2.0 / w) - Jet<N>::constant(2.0 * a / w + 1.0);
    Jet<N> g = Jet<N>::constant(1.0) - s * s;
    Jet<N> h = Jet<N>::constant(-1.0) / g + Jet<N>::constant(1.0);
    return exp(h) * amp;
  }
};

using ProfileTerm = std::variant<PolyTerm, ExpTerm, GaussTerm, BumpTerm>;

inline PolyTerm constant_term(double c) { return PolyTerm{{c}}; }
inline PolyTerm affine_term(double a, double b) { return PolyTerm{{a, b}}; }

// amp * x^p (1 - x)^r expanded into monomials.
inline PolyTerm edge_term(double amp, int p, int r) {
  if (p < 0 || r < 0) throw InvalidArgument("edge term exponents must be nonnegative");
  std::vector<double> c(static_cast<std::size_t>(p + r) + 1, 0.0);
  double binom = 1.0;
  for (int i = 0; i <= r; ++i) {
    c[static_cast<std::size_t>(p + i)] = amp * binom * (i % 2 ? -1.0 : 1.0);
    binom = binom * (r - i) / (i + 1);
  }
  return PolyTerm{c};
}

// Cubic (natural) or linear interpolant through tabulated samples.
class TabulatedSpline {
 public:
  TabulatedSpline(std::vector<double> x, std::vector<double> y, bool cubic)
      : x_(std::move(x)), y_(std::move(y)), cubic_(cubic) {
    if (x_.size() != y_.size() || x_.size() < 3)
      throw InvalidArgument("tabulated profile needs at least 3 (x, f) pairs");
    if (x_.front() != 0.0 || x_.back() != 1.0)
      throw InvalidArgument("tabulated profile must span exactly [0, 1]");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1])) throw InvalidArgument("tabulated abscissae must increase");
    m_.assign(x_.size(), 0.0);
    if (cubic_) solve_moments();
  }

  bool cubic() const { return cubic_; }
  int max_order() const { return cubic_ ? 2 : 1; }

  double derivative(int j, double x) const {
    if (j > max_order())
      throw InsufficientSmoothness("tabulated profile has no derivative of order " +
                                   std::to_string(j));
    std::size_t i = segment(x);
    double h = x_[i + 1] - x_[i];
    double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
    if (!cubic_) {
      if (j == 0) return a * y_[i] + b * y_[i + 1];
      return (y_[i + 1] - y_[i]) / h;
    }
    switch (j) {
      case 0:
        return a * y_[i] + b * y_[i + 1] +
               ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
      case 1:
        return (y_[i + 1] - y_[i]) / h - (3 * a * a - 1) / 6.0 * h * m_[i] +
               (3 * b * b - 1) / 6.0 * h * m_[i + 1];
      default:
        return a * m_[i] + b * m_[i + 1];
    }
  }

 private:
  std::size_t segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
  }

  void solve_moments() {
    std::size_t n = x_.size();
    std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      a[i] = h0 / 6.0;
      b[i] = (h0 + h1) / 3.0;
      c[i] = h1 / 6.0;
      d[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
    }
    for (std::size_t i = 1; i < n; ++i) {
      double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    m_[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
  }

  std::vector<double> x_, y_, m_;
  bool cubic_;
};

// The term multiplied by s.
inline ProfileTerm scaled(const ProfileTerm& t, double s) {
  return std::visit(
      [s](auto term) -> ProfileTerm {
        using T = decltype(term);
        if constexpr (std::is_same_v<T, PolyTerm>) {
          for (auto& c : term.coeffs) c *= s;
        } else {
          term.amp *= s;
        }
        return term;
      },
      t);
}

enum class ProfileKind { BuiltinSymbolic, TabulatedSpline };

// Warping function f with dimension n and frequency omega. Immutable.
class WarpingProfile {
 public:
  static constexpr int kMaxOrder = 8;

  WarpingProfile(std::vector<ProfileTerm> terms, int n, double omega, std::string label = "")
      : n_(n), omega_(omega), terms_(std::move(terms)), label_(std::move(label)) {
    if (terms_.empty()) throw InvalidArgument("profile needs at least one term");
    validate();
  }

  WarpingProfile(TabulatedSpline spline, int n, double omega, std::string label = "tabulated")
      : n_(n), omega_(omega), kind_(ProfileKind::TabulatedSpline),
        spline_(std::make_shared<TabulatedSpline>(std::move(spline))), label_(std::move(label)) {
    validate();
  }

  int n() const { return n_; }
  double omega() const { return omega_; }
  ProfileKind kind() const { return kind_; }
  bool symbolic() const { return kind_ == ProfileKind::BuiltinSymbolic; }
  const std::string& label() const { return label_; }
  const std::vector<ProfileTerm>& terms() const { return terms_; }
  int max_order() const { return symbolic() ? kMaxOrder : spline_->max_order(); }

  template <int N>
  Jet<N> jet(double x) const {
    if (!symbolic()) throw InsufficientSmoothness("tabulated profile has no Taylor jets");
    Jet<N> r;
    for (const auto& t : terms_)
      r += std::visit([x](const auto& term) { return term.template jet<N>(x); }, t);
    return r;
  }

  double value(double x) const { return derivative(0, x); }
  double operator()(double x) const { return value(x); }

  // f^{(j)}(x)
  double derivative(int j, double x) const {
    if (j < 0) throw InvalidArgument("negative derivative order");
    if (!symbolic()) return spline_->derivative(j, x);
    if (j > kMaxOrder)
      throw InsufficientSmoothness("derivative order beyond " + std::to_string(kMaxOrder));
    if (j <= 2) return jet<2>(x).derivative(j);
    return jet<kMaxOrder>(x).derivative(j);
  }

  double f0() const { return value(0.0); }
  double f1() const { return value(1.0); }

  // f(x) = f(1-x) on the 4097-point dyadic grid to roundoff.
  bool symmetric() const { return symmetric_; }

  // The same profile plus one more symbolic term.
  WarpingProfile with_term(const ProfileTerm& t, const std::string& suffix = "") const {
    if (!symbolic()) throw InvalidArgument("cannot add terms to a tabulated profile");
    auto terms = terms_;
    terms.push_back(t);
    return WarpingProfile(std::move(terms), n_, omega_, label_ + suffix);
  }

  WarpingProfile with_dimension(int n, double omega) const {
    WarpingProfile r = *this;
    r.n_ = n;
    r.omega_ = omega;
    r.validate();
    return r;
  }

 private:
  void validate() {
    if (n_ < 2) throw InvalidArgument("dimension n must be at least 2");
    if (!std::isfinite(omega_)) throw InvalidArgument("omega must be finite");
    const std::size_t m = 4096;
    double fmax = 0.0, asym = 0.0;
    std::vector<double> s(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
      double x = i == m ? 1.0 : static_cast<double>(i) / m;
      s[i] = value(x);
      if (!(s[i] > 0.0) || !std::isfinite(s[i]))
        throw InvalidArgument("warping function must be positive and finite on [0,1] (x=" +
                              std::to_string(x) + ")");
      fmax = std::max(fmax, s[i]);
    }
    for (std::size_t i = 0; i <= m; ++i) asym = std::max(asym, std::fabs(s[i] - s[m - i]));
    symmetric_ = asym <= 1e-14 * fmax;
  }

  int n_;
  double omega_;
  ProfileKind kind_ = ProfileKind::BuiltinSymbolic;
  std::vector<ProfileTerm> terms_;
  std::shared_ptr<const TabulatedSpline> spline_;
  std::string label_;
  bool symmetric_ = false;
};

}  // namespace steklov
