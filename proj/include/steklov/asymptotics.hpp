#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dn_map.hpp"
#include "errors.hpp"
#include "ext_scalar.hpp"
#include "geometry.hpp"
#include "jet.hpp"
#include "numerics.hpp"
#include "potential.hpp"
#include "profile.hpp"
#include "sturm.hpp"

namespace steklov {

enum class RecursionVariant { PaperStated, OracleCorrected };

inline const char* to_string(RecursionVariant v) {
  return v == RecursionVariant::PaperStated ? "paper-stated" : "oracle-corrected";
}

struct ExpansionCoefficients {
  std::vector<double> betas;   // at x = 0, from q
  std::vector<double> gammas;  // at x = 0, from q(1 - x)
  RecursionVariant variant = RecursionVariant::OracleCorrected;
};

inline constexpr int kMaxExpansionOrder = 4;

namespace detail {

inline std::vector<double> beta_sequence(const Potential& q, int order, RecursionVariant v) {
  constexpr int N = kMaxExpansionOrder;
  auto d = q.derivatives(0.0, order);
  Jet<N> b0;
  double fact = 1.0;
  for (int j = 0; j <= order; ++j) {
    if (j > 0) fact *= j;
    b0.c[j] = 0.5 * d[static_cast<std::size_t>(j)] / fact;
  }
  std::vector<Jet<N>> b{b0};
  for (int j = 0; j < order; ++j) {
    Jet<N> next = b[static_cast<std::size_t>(j)].differentiated() * 0.5;
    if (v == RecursionVariant::PaperStated) {
      for (int l = 0; l <= j; ++l)
        next += b[static_cast<std::size_t>(l)] * b[static_cast<std::size_t>(j - l)] * 0.5;
    } else {
      for (int l = 0; l <= j - 1; ++l)
        next -= b[static_cast<std::size_t>(l)] * b[static_cast<std::size_t>(j - 1 - l)] * 0.5;
    }
    b.push_back(next);
  }
  std::vector<double> out;
  for (const auto& j : b) out.push_back(j.c[0]);
  return out;
}

}  // namespace detail

// beta_j and gamma_j of M(-k^2) = -k - sum beta_j k^{-j-1} and its N analogue.
inline ExpansionCoefficients beta_coefficients(
    const Potential& q, int order, RecursionVariant v = RecursionVariant::OracleCorrected) {
  if (order < 0 || order > kMaxExpansionOrder)
    throw InvalidArgument("beta_coefficients: order must be in [0, " +
                          std::to_string(kMaxExpansionOrder) + "]");
  if (!q.has_taylor())
    throw InsufficientSmoothness("beta_coefficients needs Taylor data of the potential at 0");
  ExpansionCoefficients e;
  e.variant = v;
  e.betas = detail::beta_sequence(q, order, v);
  e.gammas = detail::beta_sequence(q.reflected(), order, v);
  return e;
}

// |M(-k^2) + k + sum_{j<=order} beta_j k^{-j-1}| k^{order+2}
inline double m_expansion_check(const Potential& q, double kappa, int order,
                                RecursionVariant v = RecursionVariant::OracleCorrected,
                                const SturmOptions& opt = {{1e-13, 1e-15}, 512}) {
  if (!(kappa >= 5.0)) throw InvalidArgument("m_expansion_check: kappa must be >= 5");
  auto e = beta_coefficients(q, order, v);
  double m = weyl_data(q, -kappa * kappa, opt).m_fun;
  double s = -kappa;
  double kp = 1.0 / kappa;
  for (int j = 0; j <= order; ++j) {
    s -= e.betas[static_cast<std::size_t>(j)] * kp;
    kp /= kappa;
  }
  return std::fabs(m - s) * std::pow(kappa, order + 2);
}

enum class CaseTag { Symmetric, IIA, IIB, IIC };

inline const char* to_string(CaseTag c) {
  switch (c) {
    case CaseTag::Symmetric: return "I-symmetric";
    case CaseTag::IIA: return "IIA";
    case CaseTag::IIB: return "IIB";
    case CaseTag::IIC: return "IIC";
  }
  return "?";
}

inline constexpr double kDefaultEpsilon = 0.05;
inline constexpr double kMinOnset = 1e-2;

struct CaseModel {
  CaseTag tag = CaseTag::Symmetric;
  std::optional<int> k;
  std::optional<double> a;
  int onset_sign = 0;     // sign of q(x) - q(1-x) just after a (IIB)
  double constant = 0.0;  // a_k (n = 2) or b_k (n >= 3); IIA only
  double alpha_exponent = 0.0;
  int n = 2;
  double omega = 0.0;
  double f0 = 1.0, f1 = 1.0;
  double q_l2 = 0.0;
  double epsilon = kDefaultEpsilon;
  std::string note;
};

// alpha_0 = 1/2; alpha_k = (k+3)/2 for n = 2 and (k+1)/2 for n >= 3.
inline double alpha_exponent(int n, int k) {
  if (k == 0) return 0.5;
  return n == 2 ? (k + 3) / 2.0 : (k + 1) / 2.0;
}

inline CaseModel case_constants(const WarpingProfile& p, double epsilon = kDefaultEpsilon) {
  if (!p.symbolic()) throw InsufficientSmoothness("case_constants needs a builtin-symbolic profile");
  CaseModel c;
  c.n = p.n();
  c.omega = p.omega();
  c.f0 = p.f0();
  c.f1 = p.f1();
  c.epsilon = epsilon;
  Potential q = q_from_profile(p);
  c.q_l2 = q.l2_norm();
  if (p.symmetric()) {
    c.tag = CaseTag::Symmetric;
    return c;
  }
  auto k = taylor_mismatch_order(p);
  if (k) {
    int kk = *k;
    auto j0 = p.jet<WarpingProfile::kMaxOrder>(0.0);
    auto j1 = p.jet<WarpingProfile::kMaxOrder>(1.0);
    double jump = j0.derivative(kk) - (kk % 2 ? -1.0 : 1.0) * j1.derivative(kk);
    double constant;
    if (kk == 0) {
      constant = 1.0 / std::sqrt(c.f0) - 1.0 / std::sqrt(c.f1);
    } else if (c.n == 2) {
      constant = -c.omega * jump / (std::ldexp(1.0, kk + 1) * std::sqrt(c.f0));
    } else {
      constant = (c.n - 2) * jump / (std::ldexp(1.0, kk + 1) * std::pow(c.f0, 1.5));
    }
    if (constant == 0.0) {
      // n = 2, omega = 0, f(0) = f(1): q vanishes and the problem is the symmetric one.
      c.tag = CaseTag::Symmetric;
      c.note = "n=2, omega=0 with f(0)=f(1): q = 0, explicit formulas apply";
      return c;
    }
    c.tag = CaseTag::IIA;
    c.k = kk;
    c.constant = constant;
    c.alpha_exponent = alpha_exponent(c.n, kk);
    return c;
  }
  auto on = asymmetry_onset(q);
  if (!on.found) {
    c.tag = CaseTag::Symmetric;
    c.note = "profile asymmetric but q symmetric";
    return c;
  }
  if (on.a >= kMinOnset) {
    c.tag = CaseTag::IIB;
    c.a = on.a;
    c.onset_sign = on.sign;
    return c;
  }
  c.tag = CaseTag::IIC;
  c.onset_sign = on.sign;
  return c;
}

struct Prediction {
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  ExtScalar gap;       // leading-order law; for IIB the central e^{-2a sqrt(mu)}
  ExtScalar gap_low;   // IIB: e^{-2(a+eps) sqrt(mu)}; IIC: splitting bound
  ExtScalar gap_high;  // IIB: e^{-2(a-eps) sqrt(mu)}
  bool gap_is_bound = false;
};

inline Prediction predict(const CaseModel& m, double mu) {
  Prediction r;
  double k = std::sqrt(mu);
  double s0 = 1.0 / std::sqrt(m.f0), s1 = 1.0 / std::sqrt(m.f1);
  switch (m.tag) {
    case CaseTag::Symmetric:
      r.lambda_plus = r.lambda_minus = k * s0;
      if (!(mu > 0)) break;
      if (m.n == 2 && m.omega == 0.0) {
        // (2/sqrt f0) sqrt(mu) / sinh sqrt(mu)
        r.gap = ExtScalar::from_log(1, std::log(4.0 * s0 * k) - k - std::log1p(-std::exp(-2.0 * k)));
      } else {
        // 2|B| with 1/Delta ~ 2 sqrt(mu) e^{-sqrt(mu)}
        r.gap = ExtScalar::from_log(1, std::log(4.0 * s0 * k) - k);
      }
      break;
    case CaseTag::IIA: {
      r.lambda_plus = std::max(s0, s1) * k;
      r.lambda_minus = std::min(s0, s1) * k;
      double c = std::fabs(m.constant);
      int kk = *m.k;
      double g;
      if (kk == 0) g = c * k;
      else if (m.n == 2) g = c * std::pow(mu, -(1.0 + kk) / 2.0);
      else g = c * std::pow(mu, (1.0 - kk) / 2.0);
      r.gap = ExtScalar(g);
      break;
    }
    case CaseTag::IIB: {
      double a = m.a.value_or(0.0);
      // q(x) - q(1-x) > 0 after a: lambda^- ~ sqrt(mu/f(0)), lambda^+ ~ sqrt(mu/f(1))
      bool pos = m.onset_sign > 0;
      r.lambda_minus = k * (pos ? s0 : s1);
      r.lambda_plus = k * (pos ? s1 : s0);
      r.gap = ExtScalar::from_log(1, -2.0 * a * k);
      r.gap_low = ExtScalar::from_log(1, -2.0 * (a + m.epsilon) * k);
      r.gap_high = ExtScalar::from_log(1, -2.0 * std::max(a - m.epsilon, 0.0) * k);
      break;
    }
    case CaseTag::IIC: {
      r.lambda_plus = std::max(s0, s1) * k;
      r.lambda_minus = std::min(s0, s1) * k;
      if (mu > 0) {
        double ln_den = k + std::log(0.5 * k * (-std::expm1(-2.0 * k)) + std::exp(m.q_l2));
        r.gap_low = ExtScalar::from_log(1, std::log(2.0 * mu) - 0.5 * std::log(m.f0) - ln_den);
      }
      r.gap = r.gap_low;
      r.gap_is_bound = true;
      break;
    }
  }
  return r;
}

// int_0^1 (q(x) - q(1-x)) Psi(x) Phi(1-x) dx by composite Simpson on grid.
inline double bridge_integral(const Potential& q, double z, const std::vector<double>& grid,
                              const SturmOptions& opt = {}) {
  if (!is_valid_unit_grid(grid)) throw InvalidArgument("bridge_integral: invalid grid");
  if (q.is_symmetric()) return 0.0;
  const std::size_t n = grid.size();
  std::vector<double> rg(n);
  for (std::size_t i = 0; i < n; ++i) rg[i] = 1.0 - grid[n - 1 - i];
  rg.front() = 0.0;
  rg.back() = 1.0;
  auto psi = solution_trace(q, z, grid, SolutionKind::Psi, opt);
  auto phi = solution_trace(q, z, rg, SolutionKind::Phi, opt);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = grid[i];
    double l = q.eval(x) - q.eval(1.0 - x);
    y[i] = l == 0.0 ? 0.0 : (ExtScalar(l) * psi.values[i] * phi.values[n - 1 - i]).to_double_flush();
  }
  return simpson(grid, y);
}

struct FitWindow {
  double lo = 10.0;
  double hi = 40.0;
};

struct GapRateFit {
  double rate = 0.0;  // slope of -ln d against sqrt(mu)
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
  bool exponential = false;
};

inline constexpr double kMinExponentialRate = 0.05;
inline constexpr double kMinRSquared = 0.99;

inline GapRateFit gap_rate_fit(const std::vector<std::pair<double, ExtScalar>>& gaps,
                               FitWindow w = {}) {
  std::vector<double> x, y;
  for (const auto& [mu, d] : gaps) {
    if (!(d.sign() > 0)) throw FitError("gap_rate_fit: nonpositive gap at mu=" + std::to_string(mu));
    double k = std::sqrt(mu);
    if (k < w.lo || k > w.hi) continue;
    x.push_back(k);
    y.push_back(-d.log_abs());
  }
  if (x.size() < 4) throw FitError("gap_rate_fit: fewer than 4 samples in the fit window");
  auto f = fit_line(x, y);
  GapRateFit r;
  r.rate = f.slope;
  r.intercept = f.intercept;
  r.samples = f.samples;
  double my = 0.0;
  for (double v : y) my += v;
  my /= static_cast<double>(y.size());
  double ss = 0.0, sr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ss += (y[i] - my) * (y[i] - my);
    double e = y[i] - (f.slope * x[i] + f.intercept);
    sr += e * e;
  }
  r.r_squared = ss > 0.0 ? 1.0 - sr / ss : 0.0;
  r.exponential = r.rate > kMinExponentialRate && r.r_squared >= kMinRSquared;
  return r;
}

// |(A - C) / B| as a log magnitude.
inline double log_diag_ratio(const DnBlock& b) {
  if (b.a_minus_c == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(std::fabs(b.a_minus_c)) - b.b_entry.log_abs();
}

// Modes with |(A_m - C_m)/B_m| > mu_m^{1/4}.
inline std::vector<std::size_t> subsequence_search(const Model& m, const TransversalSpectrum& spec,
                                                   int workers = 1, const SturmOptions& opt = {}) {
  auto res = mode_results(m, spec, workers, opt);
  std::vector<std::size_t> out;
  for (const auto& r : res) {
    if (!(r.entry.mu > 0.0)) continue;
    if (log_diag_ratio(r.block) > 0.25 * std::log(r.entry.mu)) out.push_back(r.mode);
  }
  return out;
}

inline std::vector<std::size_t> subsequence_search(const WarpingProfile& p,
                                                   const TransversalSpectrum& spec,
                                                   int workers = 1) {
  return subsequence_search(Model(p), spec, workers);
}

}  // namespace steklov
