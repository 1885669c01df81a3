#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"
#include "potential.hpp"
#include "profile.hpp"

namespace steklov {

namespace detail {

// Jet of q_f at x, valid through order N.
template <int N>
Jet<N> q_jet(const WarpingProfile& p, double x) {
  const double rho = (p.n() - 2) / 4.0;
  Jet<N + 2> f = p.jet<N + 2>(x);
  Jet<N + 2> q = f * (-p.omega());
  if (p.n() != 2) {
    Jet<N + 2> fp = f.differentiated();
    Jet<N + 2> fpp = fp.differentiated();
    Jet<N + 2> r = fp / f;
    q += (fpp / f) * rho + r * r * (rho * (rho - 1.0));
  }
  Jet<N> out;
  for (int j = 0; j <= N; ++j) out.c[j] = q.c[j];
  return out;
}

inline double q_value(const WarpingProfile& p, double x) {
  const double rho = (p.n() - 2) / 4.0;
  if (p.n() == 2) return -p.omega() * p.value(x);
  double f, f1, f2;
  if (p.symbolic()) {
    auto j = p.jet<2>(x);
    f = j.c[0];
    f1 = j.c[1];
    f2 = 2.0 * j.c[2];
  } else {
    f = p.derivative(0, x);
    f1 = p.derivative(1, x);
    f2 = p.derivative(2, x);
  }
  double r = f1 / f;
  return rho * f2 / f + rho * (rho - 1.0) * r * r - p.omega() * f;
}

}  // namespace detail

// q_f = rho f''/f + rho(rho-1)(f'/f)^2 - omega f, rho = (n-2)/4.
inline Potential q_from_profile(const WarpingProfile& p) {
  if (p.n() >= 3 && p.max_order() < 2)
    throw InsufficientSmoothness("profile '" + p.label() +
                                 "' lacks a second derivative, required for n >= 3");
  TaylorSource taylor;
  if (p.symbolic()) {
    taylor = [p](double x0, int order) {
      constexpr int kOrder = WarpingProfile::kMaxOrder - 2;
      if (order > kOrder)
        throw InsufficientSmoothness("potential derivatives available through order " +
                                     std::to_string(kOrder));
      auto j = detail::q_jet<kOrder>(p, x0);
      std::vector<double> d(static_cast<std::size_t>(order) + 1);
      for (int k = 0; k <= order; ++k) d[static_cast<std::size_t>(k)] = j.derivative(k);
      return d;
    };
  }
  return Potential([p](double x) { return detail::q_value(p, x); }, "q_f[" + p.label() + "]",
                   std::move(taylor));
}

// The expanded algebraic form (n-2)/4 f''/f + (n-2)(n-6)/16 (f'/f)^2 - omega f.
inline double q_expanded_form(const WarpingProfile& p, double x) {
  double f = p.derivative(0, x), f1 = p.derivative(1, x), f2 = p.derivative(2, x);
  double n = p.n();
  return (n - 2) / 4.0 * f2 / f + (n - 2) * (n - 6) / 16.0 * (f1 / f) * (f1 / f) -
         p.omega() * f;
}

enum class SpectrumSource { Circle, Sphere, Custom };

struct SpectrumEntry {
  double mu = 0.0;
  int multiplicity = 1;
};

struct TransversalSpectrum {
  std::vector<SpectrumEntry> entries;
  SpectrumSource source = SpectrumSource::Custom;
  double parameter = 0.0;  // R for circles, d for spheres
};

struct SpectrumSpec {
  SpectrumSource source = SpectrumSource::Circle;
  double radius = 1.0;
  int dimension = 2;
  std::vector<double> values;  // custom list

  static SpectrumSpec circle(double r) { return {SpectrumSource::Circle, r, 1, {}}; }
  static SpectrumSpec sphere(int d) { return {SpectrumSource::Sphere, 1.0, d, {}}; }
  static SpectrumSpec custom(std::vector<double> v) {
    return {SpectrumSource::Custom, 1.0, 1, std::move(v)};
  }
};

inline double binomial(int n, int k) {
  if (k < 0 || n < k) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline TransversalSpectrum transversal_spectrum(const SpectrumSpec& s, int count) {
  if (count < 1) throw InvalidArgument("transversal spectrum count must be >= 1");
  TransversalSpectrum out;
  out.source = s.source;
  switch (s.source) {
    case SpectrumSource::Circle: {
      if (!(s.radius > 0)) throw InvalidArgument("circle radius must be positive");
      out.parameter = s.radius;
      for (int j = 0; j < count; ++j)
        out.entries.push_back({(j / s.radius) * (j / s.radius), j == 0 ? 1 : 2});
      break;
    }
    case SpectrumSource::Sphere: {
      if (s.dimension < 1) throw InvalidArgument("sphere dimension must be >= 1");
      int d = s.dimension;
      out.parameter = d;
      for (int l = 0; l < count; ++l) {
        double mult = binomial(l + d, d) - binomial(l + d - 2, d);
        out.entries.push_back({static_cast<double>(l) * (l + d - 1), static_cast<int>(mult)});
      }
      break;
    }
    case SpectrumSource::Custom: {
      if (s.values.empty()) throw InvalidArgument("custom spectrum is empty");
      if (s.values.front() != 0.0)
        throw InvalidArgument("custom spectrum must start with mu_0 = 0 (connected K)");
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        double v = s.values[i];
        if (!std::isfinite(v) || v < 0) throw InvalidArgument("custom spectrum value invalid");
        if (i > 0 && v < s.values[i - 1])
          throw InvalidArgument("custom spectrum must be nondecreasing");
        if (!out.entries.empty() && out.entries.back().mu == v) {
          if (v == 0.0) throw InvalidArgument("mu_0 = 0 must have multiplicity 1");
          ++out.entries.back().multiplicity;
        } else {
          out.entries.push_back({v, 1});
        }
      }
      if (static_cast<int>(out.entries.size()) > count) out.entries.resize(static_cast<std::size_t>(count));
      break;
    }
  }
  return out;
}

inline constexpr int kDefaultProbeOrder = 6;
inline constexpr double kDefaultMismatchTol = 1e-9;

// Smallest k with |f^{(k)}(0) - (-1)^k f^{(k)}(1)| > tol (1 + |f^{(k)}(0)|).
inline std::optional<int> taylor_mismatch_order(const WarpingProfile& p,
                                                double tol = kDefaultMismatchTol,
                                                int probe_order = kDefaultProbeOrder) {
  if (!p.symbolic())
    throw InsufficientSmoothness("mismatch order needs a builtin-symbolic profile");
  auto j0 = p.jet<WarpingProfile::kMaxOrder>(0.0);
  auto j1 = p.jet<WarpingProfile::kMaxOrder>(1.0);
  for (int k = 0; k <= probe_order && k <= WarpingProfile::kMaxOrder; ++k) {
    double a = j0.derivative(k), b = j1.derivative(k);
    if (std::fabs(a - (k % 2 ? -b : b)) > tol * (1.0 + std::fabs(a))) return k;
  }
  return std::nullopt;
}

class BoundaryGeometry {
 public:
  static constexpr std::size_t kPanels = 4096;

  explicit BoundaryGeometry(const WarpingProfile& p)
      : p_(std::make_shared<WarpingProfile>(p)) {
    double f0 = p.f0(), f1 = p.f1();
    kappa0 = -p.derivative(1, 0.0) / (4.0 * std::pow(f0, 1.5));
    kappa1 = p.derivative(1, 1.0) / (4.0 * std::pow(f1, 1.5));
    width = d0(1.0);
  }

  double kappa0 = 0.0;
  double kappa1 = 0.0;
  double width = 0.0;

  // Riemannian distance to the boundary component x = 0.
  double d0(double x) const {
    if (x <= 0.0) return 0.0;
    return simpson([this](double s) { return std::sqrt(p_->value(s)); }, 0.0, x, kPanels);
  }

  double d1(double x) const {
    if (x >= 1.0) return 0.0;
    return simpson([this](double s) { return std::sqrt(p_->value(s)); }, x, 1.0, kPanels);
  }

 private:
  std::shared_ptr<const WarpingProfile> p_;
};

inline BoundaryGeometry boundary_geometry(const WarpingProfile& p) { return BoundaryGeometry(p); }

// First point where q_f(x) - q_f(1-x) departs from zero, and its sign.
struct AsymmetryOnset {
  bool found = false;
  double a = 0.0;
  int sign = 0;
};

inline AsymmetryOnset asymmetry_onset(const Potential& q, double rel_tol = 1e-10) {
  AsymmetryOnset r;
  const std::size_t m = Potential::kSamplePanels;
  double thr = rel_tol * std::max(1.0, q.sup_norm());
  for (std::size_t i = 0; i <= m / 2; ++i) {
    double l = q.sample(i) - q.sample(m - i);
    if (std::fabs(l) > thr) {
      r.found = true;
      r.a = i == 0 ? 0.0 : static_cast<double>(i - 1) / m;
      r.sign = l > 0 ? 1 : -1;
      return r;
    }
  }
  return r;
}

}  // namespace steklov
