#pragma once

#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "config.hpp"
#include "dn_map.hpp"
#include "localization.hpp"
#include "output.hpp"
#include "parallel.hpp"
#include "verification.hpp"

namespace steklov {

struct RunContext {
  ExperimentConfig config;
  Model model;
  TransversalSpectrum spectrum;
  std::vector<std::size_t> modes;
  OutputSink sink;
  int workers = 1;

  RunContext(ExperimentConfig c, const std::filesystem::path& dir, Formats f, int w)
      : config(std::move(c)), model(config.warping_profile()), spectrum(config.spectrum()),
        modes(config.selected_modes(spectrum.entries.size())), sink(dir, f), workers(w) {}
};

namespace cmd_detail {

inline Cell opt_real(const std::optional<double>& v) {
  if (v) return *v;
  return std::monostate{};
}

template <class F>
auto per_mode(const RunContext& ctx, F&& fn) {
  return parallel_map(ctx.modes.size(), ctx.workers, [&](std::size_t i) {
    std::size_t mode = ctx.modes[i];
    try {
      return fn(mode);
    } catch (const NumericalError& e) {
      throw NumericalError("mode " + std::to_string(mode) + " (mu=" + format_real(ctx.spectrum.entries[mode].mu) +
                           "): " + e.what());
    }
  });
}

inline void case_meta(Table& t, const CaseModel& c) {
  t.meta.emplace_back("case", to_string(c.tag));
  if (c.k) t.meta.emplace_back("k", std::to_string(*c.k));
  if (c.a) t.meta.emplace_back("a", format_real(*c.a));
  if (c.tag == CaseTag::IIA) {
    t.meta.emplace_back("constant", format_real(c.constant));
    t.meta.emplace_back("alpha", format_real(c.alpha_exponent));
  }
  if (c.onset_sign != 0) t.meta.emplace_back("onset_sign", std::to_string(c.onset_sign));
  t.meta.emplace_back("epsilon", format_real(c.epsilon));
  t.meta.emplace_back("q_l2", format_real(c.q_l2));
  if (!c.note.empty()) t.meta.emplace_back("note", c.note);
}

inline std::string side_name(std::optional<Dominant> d) { return d ? to_string(*d) : ""; }

}  // namespace cmd_detail

inline Table spectrum_table(const RunContext& ctx) {
  using namespace cmd_detail;
  Table t;
  t.name = "spectrum";
  t.columns = {{"m", ColumnKind::Integer},
               {"mu", ColumnKind::Real},
               {"multiplicity", ColumnKind::Integer},
               {"A", ColumnKind::Real},
               {"B", ColumnKind::Extended},
               {"C", ColumnKind::Real},
               {"lambda_plus", ColumnKind::Real},
               {"lambda_minus", ColumnKind::Real},
               {"gap", ColumnKind::Real},
               {"splitting_lower_bound", ColumnKind::Real},
               {"gap_ext", ColumnKind::Extended},
               {"splitting_lower_bound_ext", ColumnKind::Extended}};
  auto rows = per_mode(ctx, [&](std::size_t mode) {
    const auto& e = ctx.spectrum.entries[mode];
    auto b = dn_block(ctx.model, e.mu, ctx.config.run.sturm);
    auto s = steklov_pair(b);
    auto lb = splitting_lower_bound_ext(ctx.model, e.mu);
    return std::vector<Cell>{static_cast<long long>(mode), e.mu, static_cast<long long>(e.multiplicity),
                             b.a_entry, b.b_entry, b.c_entry, s.lambda_plus, s.lambda_minus,
                             s.gap_ext.to_double_flush(), lb.to_double_flush(), s.gap_ext, lb};
  });
  for (auto& r : rows) t.add_row(std::move(r));
  t.meta.emplace_back("profile", ctx.model.p.label());
  return t;
}

inline int cmd_spectrum(RunContext& ctx) {
  auto t = spectrum_table(ctx);
  ctx.sink.table(t);
  std::vector<std::pair<double, double>> lp, lm, lg;
  for (const auto& r : t.rows) {
    double mu = std::get<double>(r[1]);
    lp.push_back({mu, std::get<double>(r[6])});
    lm.push_back({mu, std::get<double>(r[7])});
    const auto& g = std::get<ExtScalar>(r[10]);
    if (!g.is_zero()) lg.push_back({std::sqrt(mu), g.log_abs()});
  }
  ctx.sink.plot("lambda", "all", "plus", lp);
  ctx.sink.plot("lambda", "all", "minus", lm);
  ctx.sink.plot("lngap", "all", "both", lg);
  return 0;
}

inline int cmd_eigenfunction(RunContext& ctx) {
  using namespace cmd_detail;
  const auto& run = ctx.config.run;
  auto grid = uniform_grid(run.grid);
  struct Traces {
    std::vector<EigenfunctionTrace> traces;
  };
  auto res = per_mode(ctx, [&](std::size_t mode) {
    Traces o;
    double mu = ctx.spectrum.entries[mode].mu;
    for (auto norm : run.normalizations) {
      auto tp = eigenfunction_pair(ctx.model, mu, grid, norm, run.sturm);
      for (auto b : run.branches) o.traces.push_back(b == Branch::Plus ? tp.plus : tp.minus);
    }
    return o;
  });
  Table summary;
  summary.name = "eigenfunction";
  summary.columns = {{"m", ColumnKind::Integer},     {"mu", ColumnKind::Real},      {"branch", ColumnKind::Text},
                     {"normalization", ColumnKind::Text}, {"w0", ColumnKind::Extended}, {"w1", ColumnKind::Extended},
                     {"bulk_norm", ColumnKind::Real}, {"file", ColumnKind::Text}};
  for (std::size_t i = 0; i < ctx.modes.size(); ++i) {
    std::size_t mode = ctx.modes[i];
    for (const auto& tr : res[i].traces) {
      Table t;
      std::string tag = std::to_string(mode) + "_" + to_string(tr.branch) + "_" + to_string(tr.normalization);
      t.name = "trace_" + tag;
      t.columns = {{"x", ColumnKind::Real}, {"ln_abs_w", ColumnKind::Real}, {"sign", ColumnKind::Integer},
                   {"w", ColumnKind::Real}};
      std::vector<std::pair<double, double>> xy;
      for (std::size_t j = 0; j < tr.grid.size(); ++j) {
        const auto& w = tr.w_values[j];
        Cell native = std::monostate{};
        if (w.fits_double()) native = w.to_double();
        t.add_row({tr.grid[j], w.log_abs(), static_cast<long long>(w.sign()), native});
        if (!w.is_zero()) xy.push_back({tr.grid[j], w.log_abs()});
      }
      t.meta.emplace_back("mu", format_real(tr.mu));
      t.meta.emplace_back("branch", to_string(tr.branch));
      t.meta.emplace_back("normalization", to_string(tr.normalization));
      ctx.sink.table(t);
      ctx.sink.plot(tr.normalization == Normalization::BoundaryL2 ? "lnw" : "lnwbulk", std::to_string(mode),
                    to_string(tr.branch), xy);
      summary.add_row({static_cast<long long>(mode), tr.mu, std::string(to_string(tr.branch)),
                       std::string(to_string(tr.normalization)), tr.w_values.front(), tr.w_values.back(),
                       tr.bulk_norm, t.name});
    }
  }
  summary.meta.emplace_back("profile", ctx.model.p.label());
  summary.meta.emplace_back("grid_points", std::to_string(run.grid));
  ctx.sink.table(summary);
  return 0;
}

inline Table asymptotics_table(const RunContext& ctx) {
  using namespace cmd_detail;
  const auto& run = ctx.config.run;
  auto cm = case_constants(ctx.model.p, run.epsilon);
  Table t;
  t.name = "asymptotics";
  t.columns = {{"m", ColumnKind::Integer},
               {"mu", ColumnKind::Real},
               {"gap", ColumnKind::Extended},
               {"gap_pred", ColumnKind::Extended},
               {"ratio", ColumnKind::Real},
               {"gap_low", ColumnKind::Extended},
               {"gap_high", ColumnKind::Extended},
               {"lambda_plus", ColumnKind::Real},
               {"lambda_plus_pred", ColumnKind::Real},
               {"lambda_minus", ColumnKind::Real},
               {"lambda_minus_pred", ColumnKind::Real},
               {"log_diag_ratio", ColumnKind::Real},
               {"splitting_lower_bound", ColumnKind::Extended}};
  auto rows = per_mode(ctx, [&](std::size_t mode) {
    double mu = ctx.spectrum.entries[mode].mu;
    auto b = dn_block(ctx.model, mu, run.sturm);
    auto s = steklov_pair(b);
    auto pr = predict(cm, mu);
    Cell ratio = std::monostate{};
    if (!pr.gap.is_zero() && !s.gap_ext.is_zero()) ratio = std::exp(s.gap_ext.log_abs() - pr.gap.log_abs());
    auto ext_cell = [](const ExtScalar& e) -> Cell {
      if (e.is_zero()) return std::monostate{};
      return e;
    };
    return std::vector<Cell>{static_cast<long long>(mode), mu, s.gap_ext, ext_cell(pr.gap), ratio,
                             ext_cell(pr.gap_low), ext_cell(pr.gap_high), s.lambda_plus, pr.lambda_plus,
                             s.lambda_minus, pr.lambda_minus, log_diag_ratio(b),
                             splitting_lower_bound_ext(ctx.model, mu)};
  });
  std::vector<std::pair<double, ExtScalar>> gaps;
  for (auto& r : rows) {
    double mu = std::get<double>(r[1]);
    const auto& g = std::get<ExtScalar>(r[2]);
    if (mu > 0 && !g.is_zero()) gaps.push_back({mu, g});
    t.add_row(std::move(r));
  }
  case_meta(t, cm);
  t.meta.emplace_back("profile", ctx.model.p.label());
  t.meta.emplace_back("variant", to_string(run.variant));
  if (ctx.model.q.has_taylor()) {
    auto e = beta_coefficients(ctx.model.q, kMaxExpansionOrder, run.variant);
    for (std::size_t j = 0; j < e.betas.size(); ++j) {
      t.meta.emplace_back("beta_" + std::to_string(j), format_real(e.betas[j]));
      t.meta.emplace_back("gamma_" + std::to_string(j), format_real(e.gammas[j]));
    }
  }
  try {
    auto f = gap_rate_fit(gaps, run.fit_window);
    t.meta.emplace_back("fit_window", format_real(run.fit_window.lo) + ":" + format_real(run.fit_window.hi));
    t.meta.emplace_back("fit_rate", format_real(f.rate));
    t.meta.emplace_back("fit_r_squared", format_real(f.r_squared));
    t.meta.emplace_back("fit_samples", std::to_string(f.samples));
    t.meta.emplace_back("fit_exponential", f.exponential ? "true" : "false");
  } catch (const FitError& e) {
    t.meta.emplace_back("fit", std::string("skipped: ") + e.what());
  }
  return t;
}

inline int cmd_asymptotics(RunContext& ctx) {
  auto t = asymptotics_table(ctx);
  ctx.sink.table(t);
  std::vector<std::pair<double, double>> g, p;
  for (const auto& r : t.rows) {
    double k = std::sqrt(std::get<double>(r[1]));
    if (const auto* e = std::get_if<ExtScalar>(&r[2]); e && !e->is_zero()) g.push_back({k, e->log_abs()});
    if (const auto* e = std::get_if<ExtScalar>(&r[3])) p.push_back({k, e->log_abs()});
  }
  ctx.sink.plot("lngap", "all", "both", g);
  ctx.sink.plot("lngappred", "all", "both", p);
  return 0;
}

inline Table localize_table(const RunContext& ctx) {
  using namespace cmd_detail;
  const auto& run = ctx.config.run;
  std::optional<CaseModel> cm;
  std::optional<SidePrediction> side;
  if (ctx.model.p.symbolic()) {
    cm = case_constants(ctx.model.p, run.epsilon);
    if (cm->tag == CaseTag::IIA || cm->tag == CaseTag::IIB) side = branch_side_prediction(*cm);
  }
  auto grid = uniform_grid(run.grid);
  Table t;
  t.name = "localize";
  t.columns = {{"m", ColumnKind::Integer},         {"mu", ColumnKind::Real},
               {"branch", ColumnKind::Text},        {"ln_w0", ColumnKind::Real},
               {"ln_w1", ColumnKind::Real},         {"mass_split", ColumnKind::Real},
               {"dominant", ColumnKind::Text},      {"predicted", ColumnKind::Text},
               {"decay_rate_0", ColumnKind::Real},  {"decay_rate_1", ColumnKind::Real},
               {"template", ColumnKind::Text},      {"bound_residual", ColumnKind::Real}};
  auto rows = per_mode(ctx, [&](std::size_t mode) {
    double mu = ctx.spectrum.entries[mode].mu;
    auto tp = eigenfunction_pair(ctx.model, mu, grid, Normalization::BoundaryL2, run.sturm);
    std::vector<std::vector<Cell>> out;
    for (auto b : run.branches) {
      const auto& tr = b == Branch::Plus ? tp.plus : tp.minus;
      auto r = classify(tr, ctx.model.p, mode);
      std::string tmpl;
      if (cm && mu > 0 && !(cm->tag == CaseTag::IIC && r.dominant == Dominant::Both)) {
        auto bt = bound_template(*cm, b, mu, r.dominant);
        tmpl = to_string(bt.kind);
        r.bound_residual = bound_check(tr, bt);
      }
      std::string pred;
      if (side) pred = to_string(b == Branch::Plus ? side->plus : side->minus);
      else if (cm && cm->tag == CaseTag::Symmetric) pred = to_string(Dominant::Both);
      out.push_back({static_cast<long long>(mode), mu, std::string(to_string(b)), r.log_w0, r.log_w1,
                     r.mass_split, std::string(to_string(r.dominant)), pred, r.decay_rate_0, r.decay_rate_1, tmpl,
                     opt_real(r.bound_residual)});
    }
    return out;
  });
  for (auto& block : rows)
    for (auto& r : block) t.add_row(std::move(r));
  if (cm) case_meta(t, *cm);
  t.meta.emplace_back("profile", ctx.model.p.label());
  t.meta.emplace_back("both_threshold", format_real(kBothThreshold));
  return t;
}

inline int cmd_localize(RunContext& ctx) {
  auto t = localize_table(ctx);
  ctx.sink.table(t);
  std::vector<std::pair<double, double>> plus, minus;
  for (const auto& r : t.rows) {
    double k = std::sqrt(std::get<double>(r[1]));
    (std::get<std::string>(r[2]) == "plus" ? plus : minus).push_back({k, std::get<double>(r[5])});
  }
  ctx.sink.plot("masssplit", "all", "plus", plus);
  ctx.sink.plot("masssplit", "all", "minus", minus);
  return 0;
}

inline int cmd_flea(RunContext& ctx) {
  const auto& run = ctx.config.run;
  if (run.deltas.empty()) throw ConfigError("[run]: flea needs deltas");
  if (!run.perturbation) throw ConfigError("[run]: flea needs a perturbation term");
  if (!ctx.model.p.symmetric()) throw ConfigError("[profile]: flea needs a symmetric base profile");
  TransversalSpectrum sub = ctx.spectrum;
  sub.entries.clear();
  for (auto m : ctx.modes) sub.entries.push_back(ctx.spectrum.entries[m]);
  FleaOptions fo;
  fo.workers = ctx.workers;
  fo.trace_points = run.grid;
  fo.sturm = run.sturm;
  FleaReport rep;
  try {
    rep = flea_sweep(ctx.model.p, *run.perturbation, run.deltas, sub, fo);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  Table t;
  t.name = "flea";
  t.columns = {{"delta", ColumnKind::Real},           {"m", ColumnKind::Integer},
               {"mu", ColumnKind::Real},              {"plus_dominant", ColumnKind::Text},
               {"minus_dominant", ColumnKind::Text},  {"plus_mass_split", ColumnKind::Real},
               {"minus_mass_split", ColumnKind::Real}, {"gap", ColumnKind::Extended},
               {"log_diag_ratio", ColumnKind::Real}};
  for (const auto& e : rep.entries) {
    std::size_t mode = ctx.modes[e.mode];
    t.add_row({e.delta, static_cast<long long>(mode), e.mu, std::string(to_string(e.plus.dominant)),
               std::string(to_string(e.minus.dominant)), e.plus.mass_split, e.minus.mass_split, e.gap,
               e.log_ratio});
  }
  Table s;
  s.name = "flea_summary";
  s.columns = {{"delta", ColumnKind::Real},       {"case", ColumnKind::Text},          {"constant", ColumnKind::Real},
               {"m_star", ColumnKind::Integer},   {"predicted_plus", ColumnKind::Text}, {"predicted_minus", ColumnKind::Text},
               {"prediction_holds", ColumnKind::Text}};
  for (const auto& row : rep.summary) {
    Cell ms = std::monostate{};
    if (row.m_star) ms = static_cast<long long>(ctx.modes[*row.m_star]);
    s.add_row({row.delta, std::string(to_string(row.model.tag)), row.model.constant, ms,
               cmd_detail::side_name(row.prediction ? std::optional(row.prediction->plus) : std::nullopt),
               cmd_detail::side_name(row.prediction ? std::optional(row.prediction->minus) : std::nullopt),
               std::string(row.prediction ? (row.prediction_holds ? "true" : "false") : "")});
  }
  s.meta.emplace_back("base_profile", ctx.model.p.label());
  ctx.sink.table(t);
  ctx.sink.table(s);
  const std::size_t nm = sub.entries.size();
  for (std::size_t di = 0; di < run.deltas.size(); ++di) {
    std::vector<std::pair<double, double>> p, m;
    for (std::size_t i = 0; i < nm; ++i) {
      const auto& e = rep.entries[di * nm + i];
      p.push_back({std::sqrt(e.mu), e.plus.mass_split});
      m.push_back({std::sqrt(e.mu), e.minus.mass_split});
    }
    ctx.sink.plot("masssplit-d" + std::to_string(di), "all", "plus", p);
    ctx.sink.plot("masssplit-d" + std::to_string(di), "all", "minus", m);
  }
  return 0;
}

// Checks tied to the configured profile, run alongside the fixed suite.
inline std::vector<CheckResult> profile_checks(const RunContext& ctx) {
  std::vector<CheckResult> out;
  const auto& q = ctx.model.q;
  out.push_back(verify_detail::run("P1", "configured profile: symmetry law M_qcheck = N_q", [&] {
    double worst = 0.0, wr = 0.0;
    std::size_t n = 0;
    for (auto mode : ctx.modes) {
      double z = -ctx.spectrum.entries[mode].mu;
      auto a = weyl_data(q.reflected(), z, ctx.config.run.sturm);
      auto b = weyl_data(q, z, ctx.config.run.sturm);
      worst = std::max({worst, rel_diff(a.m_fun, b.n_fun), rel_diff(a.n_fun, b.m_fun)});
      for (bool left : {true, false})
        wr = std::max(wr, propagate(q, z, left, ctx.config.run.sturm.grid_size).wronskian_defect);
      ++n;
    }
    return CheckResult{"", "", worst <= 1e-9 && wr <= 1e-10, false,
                       verify_detail::fmt("%g modes, max rel dev %.3g (tol 1e-9), Wronskian defect %.3g (tol 1e-10)",
                                          double(n), worst, wr)};
  }));
  out.push_back(verify_detail::run("P2", "configured profile: bridge identity", [&] {
    auto g = uniform_grid(8193);
    SturmOptions tight{{1e-12, 1e-14}, ctx.config.run.sturm.grid_size};
    double worst = 0.0;
    for (auto mode : ctx.modes) {
      double z = -ctx.spectrum.entries[mode].mu;
      double mn = mn_difference(q, z, tight);
      double br = -bridge_integral(q, z, g, tight);
      if (std::fabs(mn) <= 1e-12 && std::fabs(br) <= 1e-12) continue;
      worst = std::max(worst, std::fabs(mn - br) / std::max(std::fabs(mn), 1e-12));
    }
    return CheckResult{"", "", worst <= 1e-6, false, verify_detail::fmt("max rel dev %.3g (tol 1e-6)", worst)};
  }));
  return out;
}

inline int cmd_verify(RunContext& ctx, std::ostream& os) {
  VerifyOptions vo;
  vo.workers = ctx.workers;
  vo.shipped.push_back({ctx.model.p.label(), ctx.model.p, ctx.spectrum});
  auto res = acceptance_suite(vo);
  for (auto& r : profile_checks(ctx)) res.push_back(std::move(r));
  Table t;
  t.name = "verify";
  t.columns = {{"id", ColumnKind::Text},
               {"check", ColumnKind::Text},
               {"status", ColumnKind::Text},
               {"counted", ColumnKind::Text},
               {"detail", ColumnKind::Text}};
  for (const auto& r : res) {
    os << format_result(r) << "\n";
    t.add_row({r.id, r.name, std::string(r.passed ? "pass" : "fail"), std::string(r.informational ? "no" : "yes"),
               r.detail});
  }
  bool ok = all_passed(res);
  os << (ok ? "all counted checks passed" : "some counted checks failed") << "\n";
  ctx.sink.table(t);
  return ok ? 0 : 1;
}

}  // namespace steklov
