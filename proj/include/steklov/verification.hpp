#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "asymptotics.hpp"
#include "dn_map.hpp"
#include "localization.hpp"
#include "sturm.hpp"

namespace steklov {

struct CheckResult {
  std::string id;
  std::string name;
  bool passed = false;
  bool informational = false;  // reported, not counted
  std::string detail;
};

struct NamedProfile {
  std::string name;
  WarpingProfile profile;
  TransversalSpectrum spectrum;
};

struct VerifyOptions {
  int workers = 1;
  std::vector<NamedProfile> shipped;  // extra profiles for the splitting check
};

inline bool all_passed(const std::vector<CheckResult>& r) {
  for (const auto& c : r)
    if (!c.informational && !c.passed) return false;
  return true;
}

namespace verify_detail {

inline std::string fmt(const char* f, double a) {
  char b[96];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

inline std::string fmt(const char* f, double a, double b2) {
  char b[160];
  std::snprintf(b, sizeof b, f, a, b2);
  return b;
}

inline std::string fmt(const char* f, double a, double b2, double c) {
  char b[200];
  std::snprintf(b, sizeof b, f, a, b2, c);
  return b;
}

inline double log_sinh(double k) { return k + std::log1p(-std::exp(-2 * k)) - std::log(2.0); }
inline double log_cosh(double k) { return k + std::log1p(std::exp(-2 * k)) - std::log(2.0); }

inline WarpingProfile poly(std::vector<double> c, int n, double omega = 0.0, std::string label = "") {
  return WarpingProfile({PolyTerm{std::move(c)}}, n, omega, std::move(label));
}

inline WarpingProfile symmetric_profile() { return poly({1.0, 1.0, -1.0}, 3, 0.0, "1+x(1-x)"); }
inline WarpingProfile iia_k0_profile() { return poly({1.0, 2.0, 1.0}, 3, 0.0, "(1+x)^2"); }
inline WarpingProfile iia_k1_profile() {
  return WarpingProfile({constant_term(1.0), edge_term(2.0, 1, 2)}, 3, 0.0, "1+2x(1-x)^2");
}
inline WarpingProfile iib_profile() {
  return WarpingProfile({constant_term(1.0), BumpTerm{0.5, 0.25, 0.02}}, 2, -50.0, "1+bump(0.25)");
}
inline ProfileTerm flea_term() { return PolyTerm{{0, 0, 0, 0, 0, 0, 0, 1.0}}; }

// Eigenvalues of the n=2, omega=0 block from A = sqrt(mu) coth sqrt(mu) / sqrt(f0),
// C likewise with f1, B = -(f0 f1)^{-1/4} sqrt(mu) / sinh sqrt(mu).
inline std::pair<double, double> explicit_pair(double f0, double f1, double mu) {
  double a, c, b;
  if (mu == 0.0) {
    a = 1 / std::sqrt(f0);
    c = 1 / std::sqrt(f1);
    b = -std::pow(f0 * f1, -0.25);
  } else {
    double k = std::sqrt(mu);
    double ct = 1 / std::tanh(k);
    a = k * ct / std::sqrt(f0);
    c = k * ct / std::sqrt(f1);
    b = -std::pow(f0 * f1, -0.25) * 2 * k * std::exp(-k) / (-std::expm1(-2 * k));
  }
  double d = std::sqrt((a - c) * (a - c) + 4 * b * b);
  double lp = 0.5 * (a + c + d);
  return {lp, (a * c - b * b) / lp};
}

inline std::vector<Potential> test_potentials() {
  return {Potential::constant(0.0), Potential::constant(5.0), Potential::constant(-3.0),
          Potential([](double x) { return x; }, "x"),
          Potential([](double x) { return 10 * std::cos(2 * M_PI * x); }, "10cos(2pi x)"),
          Potential([](double x) { return std::exp(x) - 3 * x * x; }, "exp(x)-3x^2"),
          q_from_profile(iia_k0_profile()), q_from_profile(iib_profile())};
}

inline CheckResult run(const std::string& id, const std::string& name,
                       const std::function<CheckResult()>& fn) {
  try {
    CheckResult r = fn();
    r.id = id;
    r.name = name;
    return r;
  } catch (const std::exception& e) {
    return {id, name, false, false, std::string("exception: ") + e.what()};
  }
}

}  // namespace verify_detail

inline CheckResult check_weyl_closed_forms() {
  using namespace verify_detail;
  double worst = 0.0;
  for (double c : {-3.0, 0.0, 5.0}) {
    auto q = Potential::constant(c);
    for (double k : {0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 150.0, 200.0}) {
      auto w = weyl_data(q, c - k * k);
      double lm = std::log(k / std::tanh(k));
      worst = std::max({worst, std::fabs(w.delta.log_abs() - (log_sinh(k) - std::log(k))),
                        std::fabs(w.d_fun.log_abs() - log_cosh(k)),
                        std::fabs(w.e_fun.log_abs() - log_cosh(k)),
                        std::fabs(w.m_fun + std::exp(lm)) / std::exp(lm),
                        std::fabs(w.n_fun + std::exp(lm)) / std::exp(lm)});
    }
  }
  return {"", "", worst <= 1e-8, false, fmt("max rel dev %.3g (tol 1e-8)", worst)};
}

inline CheckResult check_explicit_spectrum() {
  using namespace verify_detail;
  double worst = 0.0, zero = 0.0;
  for (double f0 : {1.0, 4.0})
    for (double f1 : {1.0, 4.0}) {
      Model m(poly({f0, f1 - f0}, 2));
      for (double k : {0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0}) {
        auto s = steklov_pair(dn_block(m, k * k));
        auto [lp, lm] = explicit_pair(f0, f1, k * k);
        worst = std::max(worst, rel_diff(s.lambda_plus, lp));
        if (k == 0.0) zero = std::max(zero, std::fabs(s.lambda_minus));
        else worst = std::max(worst, rel_diff(s.lambda_minus, lm));
      }
    }
  auto s = steklov_pair(dn_block(Model(poly({1.0}, 2)), 4.0));
  double ex = std::max(std::fabs(s.lambda_plus - 2.6260706), std::fabs(s.lambda_minus - 1.5231884));
  return {"", "", worst <= 1e-8 && zero <= 1e-9 && ex <= 1e-7, false,
          fmt("max rel dev %.3g (tol 1e-8); |lambda_0^-| %.2g (tol 1e-9); f=1,mu=4 abs dev %.2g (tol 1e-7)",
              worst, zero, ex)};
}

// d sqrt(f0) e^{sqrt mu} / (2 sqrt mu); `scale` divides the ratio.
inline CheckResult check_symmetric_gap(double scale) {
  using namespace verify_detail;
  Model m(symmetric_profile());
  bool ok = true;
  std::string d;
  for (double k : {10.0, 20.0, 40.0}) {
    auto s = steklov_pair(dn_block(m, k * k));
    double r = std::exp(s.gap_ext.log_abs() + 0.5 * std::log(m.f0) + k - std::log(2 * k)) / scale;
    ok = ok && std::fabs(r - 1) <= 3 / k;
    d += fmt("k=%g ratio=%.5f; ", k, r);
  }
  return {"", "", ok, false, d + "band 1 +- 3/sqrt(mu)"};
}

inline CheckResult check_iia_constants() {
  using namespace verify_detail;
  bool ok = true;
  std::string d;
  for (const auto& p : {iia_k0_profile(), iia_k1_profile()}) {
    Model m(p);
    auto c = case_constants(p);
    if (c.tag != CaseTag::IIA) return {"", "", false, false, p.label() + " is not IIA"};
    double prev = 1e300;
    d += "k=" + std::to_string(*c.k) + ":";
    for (double k : {10.0, 20.0, 40.0}) {
      double g = steklov_pair(dn_block(m, k * k)).gap;
      double dev = std::fabs(g / std::pow(k * k, (1.0 - *c.k) / 2.0) / std::fabs(c.constant) - 1);
      ok = ok && dev < prev;
      prev = dev;
      d += fmt(" %.4f", dev);
    }
    ok = ok && prev <= 0.2;
    d += "; ";
  }
  return {"", "", ok, false, d + "rel dev at 10,20,40 (<= 0.2 at 40, decreasing)"};
}

// sign = -1 checks M - N = -int L Psi Phi-check (the identity that holds);
// sign = +1 checks the literal M - N = int L Psi Phi-check.
inline CheckResult check_bridge(double sign) {
  using namespace verify_detail;
  std::vector<Potential> qs = {Potential([](double x) { return x; }, "x"),
                               Potential([](double x) { return std::exp(x) - 2 * x * x; }, "exp(x)-2x^2"),
                               q_from_profile(poly({1.0, 0.3, -0.2}, 4, 0.5))};
  SturmOptions tight{{1e-12, 1e-14}, 512};
  auto g = uniform_grid(8193);
  double worst = 0.0, worst_direct = 0.0;
  for (const auto& q : qs)
    for (double k : {5.0, 15.0, 30.0}) {
      double z = -k * k;
      double rhs = sign * bridge_integral(q, z, g, tight);
      double mn = mn_difference(q, z, tight);
      auto w = weyl_data(q, z, tight);
      double direct = w.m_fun - w.n_fun;
      worst = std::max(worst, std::fabs(mn - rhs) / std::max(std::fabs(mn), 1e-12));
      worst_direct = std::max(worst_direct, std::fabs(direct - rhs) / std::max(std::fabs(direct), 1e-12));
    }
  double w = std::max(worst, worst_direct);
  return {"", "", w <= 1e-6, false,
          fmt("max rel dev %.3g (Wronskian route), %.3g (M-N from Weyl data); tol 1e-6", worst,
              worst_direct)};
}

inline CheckResult check_splitting(const std::vector<NamedProfile>& extra, int workers) {
  using namespace verify_detail;
  auto circle = transversal_spectrum(SpectrumSpec::circle(1.0), 41);
  std::vector<NamedProfile> all = {{"symmetric", symmetric_profile(), circle},
                                   {"iia-k0", iia_k0_profile(), circle},
                                   {"iia-k1", iia_k1_profile(), circle},
                                   {"iib", iib_profile(), circle},
                                   {"flat", poly({1.0}, 2), circle},
                                   {"main20", poly({1.0, 3.0}, 2), circle}};
  for (const auto& e : extra) all.push_back(e);
  std::size_t modes = 0, violations = 0;
  std::string where;
  for (const auto& np : all) {
    Model m(np.profile);
    for (const auto& r : mode_results(m, np.spectrum, workers)) {
      ++modes;
      if (!(r.entry.mu > 0.0)) continue;
      auto lb = splitting_lower_bound_ext(m, r.entry.mu);
      if (r.pair.gap_ext < lb) {
        ++violations;
        if (where.empty()) where = " first: " + np.name + " mode " + std::to_string(r.mode);
      }
    }
  }
  return {"", "", violations == 0, false,
          std::to_string(violations) + " violations over " + std::to_string(modes) + " modes of " +
              std::to_string(all.size()) + " profiles" + where};
}

inline CheckResult check_iib_rate() {
  using namespace verify_detail;
  Model m(iib_profile());
  auto c = case_constants(m.p);
  std::vector<std::pair<double, ExtScalar>> g;
  for (int j = 10; j <= 40; ++j) g.push_back({double(j) * j, steklov_pair(dn_block(m, double(j) * j)).gap_ext});
  auto f = gap_rate_fit(g);
  bool ok = c.tag == CaseTag::IIB && f.rate >= 0.45 && f.rate <= 0.55;
  return {"", "", ok, false,
          fmt("case a=%.4f, fitted rate %.4f (r^2 %.5f); window [0.45, 0.55]", c.a.value_or(-1), f.rate,
              f.r_squared)};
}

inline CheckResult check_flea(int workers) {
  using namespace verify_detail;
  auto spec = transversal_spectrum(SpectrumSpec::circle(1.0), 41);
  FleaOptions fo;
  fo.workers = workers;
  auto rep = flea_sweep(symmetric_profile(), flea_term(), {0.0, 1e-3}, spec, fo);
  const std::size_t nm = spec.entries.size();
  bool base_ok = true;
  double worst_end = 0.0;
  for (std::size_t i = 0; i < nm; ++i) {
    const auto& e = rep.entries[i];
    base_ok = base_ok && e.plus.dominant == Dominant::Both && e.minus.dominant == Dominant::Both;
    worst_end = std::max({worst_end, std::fabs(std::expm1(e.plus.log_w0 - e.plus.log_w1)),
                          std::fabs(std::expm1(e.minus.log_w0 - e.minus.log_w1))});
  }
  base_ok = base_ok && worst_end <= 1e-10;
  const auto& s = rep.summary[1];
  bool flip_ok = s.prediction.has_value();
  std::size_t bad = 0;
  for (std::size_t i = 0; i < nm && flip_ok; ++i) {
    const auto& e = rep.entries[nm + i];
    if (std::sqrt(e.mu) < 15.0) continue;
    if (e.plus.dominant != s.prediction->plus || e.minus.dominant != s.prediction->minus) ++bad;
  }
  flip_ok = flip_ok && bad == 0;
  std::string d = "delta=0: all both=" + std::string(base_ok ? "yes" : "no") +
                  fmt(", max endpoint mismatch %.2g; ", worst_end) + "delta=1e-3: " +
                  std::to_string(bad) + " modes with sqrt(mu)>=15 off prediction, m*=" +
                  (s.m_star ? std::to_string(*s.m_star) : std::string("none"));
  return {"", "", base_ok && flip_ok, false, d};
}

inline CheckResult check_decay_rates() {
  using namespace verify_detail;
  auto g = uniform_grid(kDefaultTracePoints);
  double worst = 0.0;
  std::size_t n = 0;
  for (const auto& p : {poly({1.0, 3.0}, 2), iia_k0_profile(), iia_k1_profile(), poly({4.0, -3.0}, 3)}) {
    Model m(p);
    auto tp = eigenfunction_pair(m, 400.0, g);
    for (auto* tr : {&tp.plus, &tp.minus}) {
      auto r = classify(*tr, m.p);
      if (r.dominant == Dominant::Both) return {"", "", false, false, p.label() + " branch not localized"};
      double rate = r.dominant == Dominant::Gamma0 ? r.decay_rate_0 : r.decay_rate_1;
      worst = std::max(worst, std::fabs(rate / 20.0 - 1));
      ++n;
    }
  }
  return {"", "", worst <= 0.1, false,
          fmt("max |rate/sqrt(mu) - 1| = %.4f over %g branches at sqrt(mu)=20 (tol 0.1)", worst, double(n))};
}

inline CheckResult check_norm_scaling() {
  using namespace verify_detail;
  auto g = uniform_grid(kDefaultTracePoints);
  double worst = 1.0;
  for (const auto& p : {symmetric_profile(), iia_k0_profile(), iia_k1_profile()}) {
    Model m(p);
    double lo = 1e300, hi = 0.0;
    for (double k = 2; k <= 60; k += 2) {
      auto tp = eigenfunction_pair(m, k * k, g);
      for (auto* tr : {&tp.plus, &tp.minus}) {
        double s = std::pow(k * k, 0.25) * tr->bulk_norm;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
    }
    worst = std::max(worst, hi / lo);
  }
  return {"", "", worst < 3.0, false, fmt("max band ratio %.4f (limit 3)", worst)};
}

inline CheckResult check_beta_arbitration() {
  using namespace verify_detail;
  auto q = Potential::constant(5.0);
  std::string d;
  int bounded = 0;
  std::string winner;
  for (auto v : {RecursionVariant::PaperStated, RecursionVariant::OracleCorrected}) {
    std::vector<double> r;
    for (double k : {10.0, 20.0, 40.0}) r.push_back(m_expansion_check(q, k, 2, v));
    bool b = r[2] <= r[0] && r[1] <= 2 * r[0];
    if (b) {
      ++bounded;
      winner = to_string(v);
    }
    d += std::string(to_string(v)) + fmt(": %.4g %.4g %.4g", r[0], r[1], r[2]) + (b ? " bounded; " : " grows; ");
  }
  return {"", "", bounded == 1, false, d + "winner " + (bounded == 1 ? winner : std::string("none"))};
}

inline CheckResult check_wronskian_symmetry() {
  using namespace verify_detail;
  double wr = 0.0, sym = 0.0;
  for (const auto& q : test_potentials())
    for (double z : {5.0, 0.0, -1.0, -100.0, -2500.0, -40000.0}) {
      for (bool left : {true, false}) wr = std::max(wr, propagate(q, z, left, 128).wronskian_defect);
      if (z > 0) continue;
      auto a = weyl_data(q.reflected(), z);
      auto b = weyl_data(q, z);
      sym = std::max({sym, rel_diff(a.m_fun, b.n_fun), rel_diff(a.n_fun, b.m_fun)});
    }
  return {"", "", wr <= 1e-10 && sym <= 1e-9, false,
          fmt("max Wronskian defect %.3g (tol 1e-10), max |M_qcheck - N_q| rel %.3g (tol 1e-9)", wr, sym)};
}

inline std::vector<CheckResult> acceptance_suite(const VerifyOptions& opt = {}) {
  using verify_detail::run;
  std::vector<CheckResult> out;
  out.push_back(run("1", "closed-form Weyl agreement", check_weyl_closed_forms));
  out.push_back(run("2", "explicit n=2 spectrum", check_explicit_spectrum));
  out.push_back(run("3", "symmetric gap law, constant 4/sqrt(f0)", [] { return check_symmetric_gap(2.0); }));
  auto lit3 = run("3-literal", "symmetric gap law as stated, constant 2/sqrt(f0)",
                  [] { return check_symmetric_gap(1.0); });
  lit3.informational = true;
  out.push_back(lit3);
  out.push_back(run("4", "case IIA leading constants", check_iia_constants));
  out.push_back(run("5", "bridge identity M-N = -int L Psi Phi-check", [] { return check_bridge(-1.0); }));
  auto lit5 = run("5-literal", "bridge identity with + sign", [] { return check_bridge(1.0); });
  lit5.informational = true;
  out.push_back(lit5);
  out.push_back(run("6", "splitting lower bound", [&] { return check_splitting(opt.shipped, opt.workers); }));
  out.push_back(run("7", "case IIB gap rate", check_iib_rate));
  out.push_back(run("8", "flea flip", [&] { return check_flea(opt.workers); }));
  out.push_back(run("9", "decay rates", check_decay_rates));
  out.push_back(run("10", "norm scaling", check_norm_scaling));
  out.push_back(run("11", "beta-recursion arbitration", check_beta_arbitration));
  out.push_back(run("12", "Wronskian and symmetry laws", check_wronskian_symmetry));
  return out;
}

inline std::string format_result(const CheckResult& r) {
  std::string tag = r.informational ? (r.passed ? "INFO-PASS" : "INFO-FAIL") : (r.passed ? "PASS" : "FAIL");
  return "[" + tag + "] " + r.id + " " + r.name + ": " + r.detail;
}

}  // namespace steklov
