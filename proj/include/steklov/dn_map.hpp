#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"
#include "ext_scalar.hpp"
#include "geometry.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "profile.hpp"
#include "sturm.hpp"

namespace steklov {

// A profile with its potential and boundary data, built once and shared.
struct Model {
  explicit Model(const WarpingProfile& prof)
      : p(prof), q(q_from_profile(prof)), f0(prof.f0()), f1(prof.f1()),
        fp0(prof.derivative(1, 0.0)), fp1(prof.derivative(1, 1.0)),
        symmetric(prof.symmetric() && q.is_symmetric()) {
    if (symmetric) {
      f1 = f0;
      fp1 = -fp0;
    }
  }

  WarpingProfile p;
  Potential q;
  double f0, f1, fp0, fp1;
  bool symmetric;

  int n() const { return p.n(); }
  // (n-2) f'(0) / (4 f(0)^{3/2}) and its mirror at x = 1
  double curvature0() const { return (n() - 2) * fp0 / (4.0 * std::pow(f0, 1.5)); }
  double curvature1() const { return (n() - 2) * fp1 / (4.0 * std::pow(f1, 1.5)); }
};

struct DnBlock {
  double mu = 0.0;
  double a_entry = 0.0;
  double c_entry = 0.0;
  ExtScalar b_entry;
  double a_minus_c = 0.0;  // A - C without cancellation
  WeylData weyl;
};

inline DnBlock dn_block(const Model& m, double mu, const SturmOptions& opt = {}) {
  if (!(mu >= 0.0)) throw InvalidArgument("mu must be nonnegative");
  DnBlock b;
  b.mu = mu;
  try {
    b.weyl = weyl_data(m.q, -mu, opt);
  } catch (const NearDirichletEigenvalue& e) {
    throw NearDirichletEigenvalue(std::string(e.what()) + "; omega=" +
                                  std::to_string(m.p.omega()) +
                                  " lies in the Dirichlet spectrum for mu=" + std::to_string(mu));
  }
  const double s0 = std::sqrt(m.f0), s1 = std::sqrt(m.f1);
  b.a_entry = -b.weyl.m_fun / s0 + m.curvature0();
  b.c_entry = -b.weyl.n_fun / s1 - m.curvature1();
  b.b_entry = -ExtScalar(std::pow(m.f0 * m.f1, -0.25)) / b.weyl.delta;
  if (m.symmetric) {
    b.c_entry = b.a_entry;
    b.a_minus_c = 0.0;
  } else {
    double mn = mn_difference(m.q, -mu, opt);
    b.a_minus_c = -mn / s0 + b.weyl.n_fun * (1.0 / s1 - 1.0 / s0) + m.curvature0() +
                  m.curvature1();
  }
  return b;
}

inline DnBlock dn_block(const WarpingProfile& p, double mu, const SturmOptions& opt = {}) {
  return dn_block(Model(p), mu, opt);
}

struct SteklovPair {
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double gap = 0.0;
  ExtScalar gap_ext;
  ExtScalar ratio_plus, ratio_minus;  // (lambda - A) / B
  ExtScalar norm_plus, norm_minus;    // sqrt(1 + ratio^2)
};

inline SteklovPair steklov_pair(const DnBlock& b) {
  SteklovPair s;
  ExtScalar t(-b.a_minus_c);  // C - A
  ExtScalar two_b = b.b_entry * ExtScalar(2.0);
  ExtScalar d = hypot(t, two_b);
  s.gap_ext = d;
  s.gap = d.to_double_flush();
  double sum = b.a_entry + b.c_entry;
  s.lambda_plus = 0.5 * (sum + s.gap);
  s.lambda_minus = 0.5 * (sum - s.gap);
  if (b.b_entry.is_zero()) {
    s.ratio_plus = s.ratio_minus = ExtScalar();
  } else if (t.sign() >= 0) {
    s.ratio_plus = (t + d) / two_b;
    s.ratio_minus = -two_b / (t + d);
  } else {
    s.ratio_minus = (t - d) / two_b;
    s.ratio_plus = -two_b / (t - d);
  }
  s.norm_plus = hypot(ExtScalar(1.0), s.ratio_plus);
  s.norm_minus = hypot(ExtScalar(1.0), s.ratio_minus);
  return s;
}

// 2 mu / [(f0 f1)^{1/4} (sqrt(mu) sinh sqrt(mu) + e^{sqrt(mu) + ||q||})]
inline ExtScalar splitting_lower_bound_ext(const Model& m, double mu, double prefactor) {
  if (!(mu > 0.0)) return ExtScalar();
  double k = std::sqrt(mu);
  double ln_den = k + std::log(0.5 * k * (-std::expm1(-2.0 * k)) + std::exp(m.q.l2_norm()));
  return ExtScalar::from_log(1, std::log(2.0 * mu) - std::log(prefactor) - ln_den);
}

inline ExtScalar splitting_lower_bound_ext(const Model& m, double mu) {
  return splitting_lower_bound_ext(m, mu, std::pow(m.f0 * m.f1, 0.25));
}

inline double splitting_lower_bound(const Model& m, double mu) {
  return splitting_lower_bound_ext(m, mu).to_double_flush();
}

inline double splitting_lower_bound(const WarpingProfile& p, double mu) {
  return splitting_lower_bound(Model(p), mu);
}

// Same inequality with the f(0)^{1/2} prefactor of the generic-subsequence
// statement; reported alongside the main bound.
inline double splitting_lower_bound_sqrt_f0(const Model& m, double mu) {
  return splitting_lower_bound_ext(m, mu, std::sqrt(m.f0)).to_double_flush();
}

enum class Branch { Plus, Minus };
enum class Normalization { BoundaryL2, BulkL2 };

inline const char* to_string(Branch b) { return b == Branch::Plus ? "plus" : "minus"; }
inline const char* to_string(Normalization n) {
  return n == Normalization::BoundaryL2 ? "boundary" : "bulk";
}

struct EigenfunctionTrace {
  double mu = 0.0;
  Branch branch = Branch::Plus;
  Normalization normalization = Normalization::BoundaryL2;
  std::vector<double> grid;
  std::vector<ExtScalar> w_values;
  std::vector<double> phi_factor;  // f^{(2-n)/4}
  double bulk_norm = 0.0;          // of the boundary-normalized profile
};

inline constexpr std::size_t kDefaultTracePoints = 1025;

inline double weighted_norm(const std::vector<double>& grid, const std::vector<ExtScalar>& w,
                            const WarpingProfile& p) {
  if (grid.size() < 128) throw InvalidArgument("bulk_norm: grid needs at least 128 points");
  std::vector<double> y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double v = w[i].to_double_flush();
    y[i] = v * v * p.value(grid[i]);
  }
  return std::sqrt(simpson(grid, y));
}

// (int |w|^2 f dx)^{1/2} by composite Simpson on the trace grid.
inline double bulk_norm(const EigenfunctionTrace& tr, const WarpingProfile& p) {
  return weighted_norm(tr.grid, tr.w_values, p);
}

namespace detail {

inline EigenfunctionTrace assemble_trace(const Model& m, double mu, Branch branch,
                                         const std::vector<double>& grid, Normalization norm,
                                         const SteklovPair& sp, const SolutionTrace& psi,
                                         const SolutionTrace& phi) {
  const ExtScalar& ratio = branch == Branch::Plus ? sp.ratio_plus : sp.ratio_minus;
  const ExtScalar& nn = branch == Branch::Plus ? sp.norm_plus : sp.norm_minus;
  ExtScalar c1 = ExtScalar(std::pow(m.f0, -0.25)) / nn;
  ExtScalar c2 = ratio * ExtScalar(std::pow(m.f1, -0.25)) / nn;
  EigenfunctionTrace tr;
  tr.mu = mu;
  tr.branch = branch;
  tr.normalization = norm;
  tr.grid = grid;
  tr.w_values.resize(grid.size());
  tr.phi_factor.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    tr.w_values[i] = c1 * psi.values[i] + c2 * phi.values[i];
    tr.phi_factor[i] = std::pow(m.p.value(grid[i]), (2.0 - m.n()) / 4.0);
  }
  tr.bulk_norm = weighted_norm(grid, tr.w_values, m.p);
  if (norm == Normalization::BulkL2) {
    ExtScalar s(1.0 / tr.bulk_norm);
    for (auto& v : tr.w_values) v = v * s;
  }
  return tr;
}

}  // namespace detail

// w = c1 Psi + c2 Phi with (c1, c2) the DN eigenvector (1, ratio) / |(1, ratio)|
// scaled by f^{-1/4} at each end.
inline EigenfunctionTrace eigenfunction_trace(const Model& m, double mu, Branch branch,
                                              const std::vector<double>& grid,
                                              Normalization norm = Normalization::BoundaryL2,
                                              const SturmOptions& opt = {}) {
  DnBlock blk = dn_block(m, mu, opt);
  SteklovPair sp = steklov_pair(blk);
  auto psi = solution_trace(m.q, -mu, grid, SolutionKind::Psi, opt);
  auto phi = solution_trace(m.q, -mu, grid, SolutionKind::Phi, opt);
  return detail::assemble_trace(m, mu, branch, grid, norm, sp, psi, phi);
}

struct TracePair {
  DnBlock block;
  SteklovPair pair;
  EigenfunctionTrace plus, minus;
};

// Both branches from one DN block and one set of Weyl traces.
inline TracePair eigenfunction_pair(const Model& m, double mu, const std::vector<double>& grid,
                                    Normalization norm = Normalization::BoundaryL2,
                                    const SturmOptions& opt = {}) {
  TracePair r;
  r.block = dn_block(m, mu, opt);
  r.pair = steklov_pair(r.block);
  auto psi = solution_trace(m.q, -mu, grid, SolutionKind::Psi, opt);
  auto phi = solution_trace(m.q, -mu, grid, SolutionKind::Phi, opt);
  r.plus = detail::assemble_trace(m, mu, Branch::Plus, grid, norm, r.pair, psi, phi);
  r.minus = detail::assemble_trace(m, mu, Branch::Minus, grid, norm, r.pair, psi, phi);
  return r;
}

inline EigenfunctionTrace eigenfunction_trace(const WarpingProfile& p, double mu, Branch branch,
                                              const std::vector<double>& grid,
                                              Normalization norm = Normalization::BoundaryL2,
                                              const SturmOptions& opt = {}) {
  return eigenfunction_trace(Model(p), mu, branch, grid, norm, opt);
}

struct SpectrumPoint {
  double lambda = 0.0;
  Branch branch = Branch::Minus;
  std::size_t mode = 0;
  int multiplicity = 1;
};

struct ModeResult {
  std::size_t mode = 0;
  SpectrumEntry entry;
  DnBlock block;
  SteklovPair pair;
};

inline std::vector<ModeResult> mode_results(const Model& m, const TransversalSpectrum& spec,
                                            int workers = 1, const SturmOptions& opt = {}) {
  return parallel_map(spec.entries.size(), workers, [&](std::size_t i) {
    ModeResult r;
    r.mode = i;
    r.entry = spec.entries[i];
    try {
      r.block = dn_block(m, r.entry.mu, opt);
    } catch (const NumericalError& e) {
      throw NumericalError("mode " + std::to_string(i) + ": " + e.what());
    }
    r.pair = steklov_pair(r.block);
    return r;
  });
}

// The union of the per-mode spectra, sorted by eigenvalue.
inline std::vector<SpectrumPoint> full_spectrum(const Model& m, const TransversalSpectrum& spec,
                                                int workers = 1, const SturmOptions& opt = {}) {
  std::vector<SpectrumPoint> out;
  for (const auto& r : mode_results(m, spec, workers, opt)) {
    out.push_back({r.pair.lambda_minus, Branch::Minus, r.mode, r.entry.multiplicity});
    out.push_back({r.pair.lambda_plus, Branch::Plus, r.mode, r.entry.multiplicity});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SpectrumPoint& a, const SpectrumPoint& b) { return a.lambda < b.lambda; });
  return out;
}

inline std::vector<SpectrumPoint> full_spectrum(const WarpingProfile& p,
                                                const TransversalSpectrum& spec, int workers = 1) {
  return full_spectrum(Model(p), spec, workers);
}

}  // namespace steklov
