#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "dn_map.hpp"
#include "errors.hpp"
#include "ext_scalar.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "profile.hpp"

namespace steklov {

enum class Dominant { Gamma0, Gamma1, Both };

inline const char* to_string(Dominant d) {
  switch (d) {
    case Dominant::Gamma0: return "Gamma0";
    case Dominant::Gamma1: return "Gamma1";
    case Dominant::Both: return "both";
  }
  return "?";
}

inline constexpr double kBothThreshold = 0.05;
inline constexpr double kBoundSlack = 0.1;

struct ClassifyOptions {
  double both_threshold = kBothThreshold;
  double fit0_lo = 0.05, fit0_hi = 0.3;
  double fit1_lo = 0.7, fit1_hi = 0.95;
};

struct LocalizationReport {
  std::size_t mode = 0;
  Branch branch = Branch::Plus;
  double mu = 0.0;
  double log_w0 = 0.0, log_w1 = 0.0;  // ln|w(0)|, ln|w(1)|
  double mass_split = 0.5;            // share of int |w|^2 f on [0, 1/2]
  Dominant dominant = Dominant::Both;
  double decay_rate_0 = 0.0;  // -d ln|w|/dx on the window near x = 0
  double decay_rate_1 = 0.0;  // +d ln|w|/dx on the window near x = 1
  std::optional<double> bound_residual;
};

namespace detail {

inline double window_rate(const EigenfunctionTrace& tr, double lo, double hi) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < tr.grid.size(); ++i) {
    double g = tr.grid[i];
    if (g < lo || g > hi || tr.w_values[i].is_zero()) continue;
    x.push_back(g);
    y.push_back(tr.w_values[i].log_abs());
  }
  return fit_line(x, y).slope;
}

// int_0^{1/2} and int_0^1 of |w|^2 f, splitting at x = 1/2 with log-linear
// interpolation when 1/2 is not a grid point.
inline std::pair<double, double> half_masses(const EigenfunctionTrace& tr, const WarpingProfile& p) {
  const auto& g = tr.grid;
  std::vector<double> y(g.size());
  double scale = -std::numeric_limits<double>::infinity();
  for (const auto& w : tr.w_values)
    if (!w.is_zero()) scale = std::max(scale, 2.0 * w.log_abs());
  if (!std::isfinite(scale)) throw DegenerateTrace("eigenfunction trace vanishes identically");
  for (std::size_t i = 0; i < g.size(); ++i)
    y[i] = tr.w_values[i].is_zero() ? 0.0
                                    : std::exp(2.0 * tr.w_values[i].log_abs() - scale) * p.value(g[i]);
  std::vector<double> xl, yl;
  for (std::size_t i = 0; i < g.size() && g[i] <= 0.5; ++i) {
    xl.push_back(g[i]);
    yl.push_back(y[i]);
  }
  if (xl.back() < 0.5) {
    std::size_t i = xl.size();
    double t = (0.5 - g[i - 1]) / (g[i] - g[i - 1]);
    double v = (y[i - 1] > 0 && y[i] > 0)
                   ? std::exp((1 - t) * std::log(y[i - 1]) + t * std::log(y[i]))
                   : (1 - t) * y[i - 1] + t * y[i];
    xl.push_back(0.5);
    yl.push_back(v);
  }
  double left = xl.size() >= 2 ? simpson(xl, yl) : 0.0;
  return {left, simpson(g, y)};
}

}  // namespace detail

inline LocalizationReport classify(const EigenfunctionTrace& tr, const WarpingProfile& p,
                                   std::size_t mode = 0, const ClassifyOptions& opt = {}) {
  if (tr.normalization != Normalization::BoundaryL2)
    throw InvalidArgument("classify expects a boundary-normalized trace");
  LocalizationReport r;
  r.mode = mode;
  r.branch = tr.branch;
  r.mu = tr.mu;
  auto [left, total] = detail::half_masses(tr, p);
  if (!(total > 0.0)) throw DegenerateTrace("eigenfunction trace has zero mass");
  r.mass_split = std::clamp(left / total, 0.0, 1.0);
  if (std::fabs(r.mass_split - 0.5) <= opt.both_threshold) r.dominant = Dominant::Both;
  else r.dominant = r.mass_split > 0.5 ? Dominant::Gamma0 : Dominant::Gamma1;
  const auto& w = tr.w_values;
  r.log_w0 = w.front().is_zero() ? -std::numeric_limits<double>::infinity() : w.front().log_abs();
  r.log_w1 = w.back().is_zero() ? -std::numeric_limits<double>::infinity() : w.back().log_abs();
  r.decay_rate_0 = -detail::window_rate(tr, opt.fit0_lo, opt.fit0_hi);
  r.decay_rate_1 = detail::window_rate(tr, opt.fit1_lo, opt.fit1_hi);
  return r;
}

enum class TemplateKind { Main20Equal, Main20Unequal, MainSymmetric, MainIIA, MainIIB, MainIIC };

inline const char* to_string(TemplateKind k) {
  switch (k) {
    case TemplateKind::Main20Equal: return "Main20-equal";
    case TemplateKind::Main20Unequal: return "Main20-unequal";
    case TemplateKind::MainSymmetric: return "MainSymmetric";
    case TemplateKind::MainIIA: return "MainIIA";
    case TemplateKind::MainIIB: return "MainIIB";
    case TemplateKind::MainIIC: return "MainIIC";
  }
  return "?";
}

// ln of a pointwise envelope: ln(e^{near(x)} + e^{far(x)}) with
// near = c_near - k x, far = c_far - k(shift - x) for a Gamma0 branch;
// x -> 1 - x for a Gamma1 branch.
struct BoundTemplate {
  TemplateKind kind = TemplateKind::MainSymmetric;
  CaseTag tag = CaseTag::Symmetric;
  Branch branch = Branch::Plus;
  Dominant side = Dominant::Both;
  double mu = 0.0;
  // log prefactors of the two terms, and the offset of the far term
  double log_near = 0.0, log_far = 0.0;
  double far_shift = 1.0;

  double log_value(double x) const {
    double k = std::sqrt(mu);
    double a, b;
    switch (side) {
      case Dominant::Gamma0:
        a = log_near - k * x;
        b = log_far - k * (far_shift - x);
        break;
      case Dominant::Gamma1:
        a = log_near - k * (1.0 - x);
        b = log_far - k * (far_shift - (1.0 - x));
        break;
      case Dominant::Both:
      default:
        a = log_near - k * x;
        b = log_far - k * (1.0 - x);
        break;
    }
    double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
  }
  double value(double x) const { return std::exp(log_value(x)); }
};

struct SidePrediction {
  Dominant plus = Dominant::Gamma0;
  Dominant minus = Dominant::Gamma1;
};

inline SidePrediction branch_side_prediction(const CaseModel& m) {
  SidePrediction s;
  bool plus_at_0;
  if (m.tag == CaseTag::IIA) {
    plus_at_0 = m.constant > 0;
  } else if (m.tag == CaseTag::IIB) {
    plus_at_0 = m.onset_sign > 0;
  } else {
    throw CaseMismatch(std::string("no branch-side prediction for case ") + to_string(m.tag));
  }
  s.plus = plus_at_0 ? Dominant::Gamma0 : Dominant::Gamma1;
  s.minus = plus_at_0 ? Dominant::Gamma1 : Dominant::Gamma0;
  return s;
}

// The envelope of the theorem matching the case model. For IIC, whose side
// is not predicted, `observed` supplies it.
inline BoundTemplate bound_template(const CaseModel& m, Branch branch, double mu,
                                    std::optional<Dominant> observed = std::nullopt) {
  BoundTemplate t;
  t.tag = m.tag;
  t.branch = branch;
  t.mu = mu;
  const double lmu = mu > 0 ? std::log(mu) : 0.0;
  const double pre = m.n >= 3 ? (m.n - 2) / 4.0 * lmu : 0.0;  // mu^{(n-2)/4}
  switch (m.tag) {
    case CaseTag::Symmetric:
      t.kind = (m.n == 2 && m.omega == 0.0) ? TemplateKind::Main20Equal : TemplateKind::MainSymmetric;
      t.side = Dominant::Both;
      t.log_near = t.log_far = pre;
      break;
    case CaseTag::IIA: {
      auto s = branch_side_prediction(m);
      t.side = branch == Branch::Plus ? s.plus : s.minus;
      int k = *m.k;
      t.kind = (m.n == 2 && k == 0) ? TemplateKind::Main20Unequal : TemplateKind::MainIIA;
      // mu^{alpha_k - 1/2} on the far term: mu^{k/2} for n >= 3, mu^{(k+2)/2} for n = 2, k >= 1
      t.log_near = pre;
      t.log_far = pre + (m.alpha_exponent - 0.5) * lmu;
      t.far_shift = 2.0;
      break;
    }
    case CaseTag::IIB: {
      auto s = branch_side_prediction(m);
      t.kind = TemplateKind::MainIIB;
      t.side = branch == Branch::Plus ? s.plus : s.minus;
      t.log_near = (m.n - 2) / 4.0 * lmu;  // sqrt(mu)^{(n-2)/2}
      t.log_far = 0.0;
      t.far_shift = 2.0 - 2.0 * (m.a.value_or(0.0) + m.epsilon);
      break;
    }
    case CaseTag::IIC:
      if (!observed || *observed == Dominant::Both)
        throw CaseMismatch("IIC template needs an observed single-sided branch");
      t.kind = TemplateKind::MainIIC;
      t.side = *observed;
      t.log_near = (m.n - 2) / 4.0 * lmu;
      t.log_far = t.log_near + std::log(m.epsilon);
      t.far_shift = 1.0;
      break;
  }
  return t;
}

// max_x ln|w(x)| - ln(C T(x)) with C fitted at the dominant endpoint;
// nullopt when mu = 0.
inline std::optional<double> bound_check(const EigenfunctionTrace& tr, const BoundTemplate& t) {
  if (tr.branch != t.branch) throw CaseMismatch("bound_check: trace and template branches differ");
  if (tr.mu != t.mu) throw CaseMismatch("bound_check: trace and template mu differ");
  if (!(tr.mu > 0.0)) return std::nullopt;
  const auto& w = tr.w_values;
  std::size_t at;
  if (t.side == Dominant::Gamma0) at = 0;
  else if (t.side == Dominant::Gamma1) at = w.size() - 1;
  else at = (w.back().is_zero() || (!w.front().is_zero() && w.front().log_abs() >= w.back().log_abs())) ? 0 : w.size() - 1;
  if (w[at].is_zero()) throw DegenerateTrace("bound_check: trace vanishes at the dominant endpoint");
  double log_c = w[at].log_abs() - t.log_value(tr.grid[at]);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i].is_zero()) continue;
    worst = std::max(worst, w[i].log_abs() - log_c - t.log_value(tr.grid[i]));
  }
  return worst;
}

inline bool bound_holds(double residual) { return residual <= kBoundSlack; }

struct FleaOptions {
  int workers = 1;
  std::size_t trace_points = kDefaultTracePoints;
  ClassifyOptions classify{};
  SturmOptions sturm{};
};

struct FleaEntry {
  double delta = 0.0;
  std::size_t mode = 0;
  double mu = 0.0;
  LocalizationReport plus, minus;
  ExtScalar gap;
  double log_ratio = 0.0;  // ln |(A - C) / B|
};

struct FleaSummary {
  double delta = 0.0;
  CaseModel model;
  std::optional<SidePrediction> prediction;
  std::optional<std::size_t> m_star;  // first mode from which every mode is single-sided
  bool prediction_holds = false;      // sides match the prediction for all m >= m_star
};

struct FleaReport {
  std::vector<FleaEntry> entries;  // delta-major, then mode
  std::vector<FleaSummary> summary;
};

inline FleaReport flea_sweep(const WarpingProfile& base, const ProfileTerm& perturbation,
                             const std::vector<double>& deltas, const TransversalSpectrum& spec,
                             const FleaOptions& opt = {}) {
  if (!base.symmetric()) throw InvalidArgument("flea_sweep: base profile must be symmetric");
  if (deltas.empty()) throw InvalidArgument("flea_sweep: no deltas");
  std::vector<Model> models;
  FleaReport rep;
  for (double d : deltas) {
    WarpingProfile p = d == 0.0 ? base : base.with_term(scaled(perturbation, d));
    models.emplace_back(p);
    FleaSummary s;
    s.delta = d;
    s.model = case_constants(p);
    if (s.model.tag == CaseTag::IIA || s.model.tag == CaseTag::IIB)
      s.prediction = branch_side_prediction(s.model);
    rep.summary.push_back(s);
  }
  const std::size_t nm = spec.entries.size();
  auto grid = uniform_grid(opt.trace_points);
  rep.entries = parallel_map(deltas.size() * nm, opt.workers, [&](std::size_t idx) {
    std::size_t di = idx / nm, mi = idx % nm;
    const Model& m = models[di];
    double mu = spec.entries[mi].mu;
    FleaEntry e;
    e.delta = deltas[di];
    e.mode = mi;
    e.mu = mu;
    auto tp = eigenfunction_pair(m, mu, grid, Normalization::BoundaryL2, opt.sturm);
    e.plus = classify(tp.plus, m.p, mi, opt.classify);
    e.minus = classify(tp.minus, m.p, mi, opt.classify);
    e.gap = tp.pair.gap_ext;
    e.log_ratio = log_diag_ratio(tp.block);
    return e;
  });
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    auto& s = rep.summary[di];
    std::optional<std::size_t> start;
    for (std::size_t mi = nm; mi-- > 0;) {
      const auto& e = rep.entries[di * nm + mi];
      if (e.plus.dominant == Dominant::Both || e.minus.dominant == Dominant::Both) break;
      start = mi;
    }
    s.m_star = start;
    if (start && s.prediction) {
      s.prediction_holds = true;
      for (std::size_t mi = *start; mi < nm; ++mi) {
        const auto& e = rep.entries[di * nm + mi];
        if (e.plus.dominant != s.prediction->plus || e.minus.dominant != s.prediction->minus)
          s.prediction_holds = false;
      }
    }
  }
  return rep;
}

}  // namespace steklov
