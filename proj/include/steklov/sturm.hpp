#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "ext_scalar.hpp"
#include "numerics.hpp"
#include "ode.hpp"
#include "potential.hpp"

namespace steklov {

struct SturmOptions {
  OdeTolerance tol{};
  int grid_size = 512;  // checkpoint segments; bounds the step size by 1/grid_size
};

struct FundamentalData {
  double z = 0.0;
  bool from_left = true;
  ExtScalar c0_1, c0p_1, s0_1, s0p_1;  // filled when from_left
  ExtScalar c1_0, c1p_0, s1_0, s1p_0;  // filled otherwise
  // |W - 1| / (|c s'| + |c' s|) at the far endpoint
  double wronskian_defect = 0.0;
};

struct WeylData {
  double z = 0.0;
  ExtScalar delta, d_fun, e_fun;
  double m_fun = 0.0;
  double n_fun = 0.0;
};

enum class SolutionKind { Psi, Phi, C0, S0, C1, S1, Combination };

inline const char* to_string(SolutionKind k) {
  switch (k) {
    case SolutionKind::Psi: return "Psi";
    case SolutionKind::Phi: return "Phi";
    case SolutionKind::C0: return "c0";
    case SolutionKind::S0: return "s0";
    case SolutionKind::C1: return "c1";
    case SolutionKind::S1: return "s1";
    case SolutionKind::Combination: return "combination";
  }
  return "?";
}

struct SolutionTrace {
  std::vector<double> grid;
  std::vector<ExtScalar> values;
  SolutionKind which = SolutionKind::Combination;
};

namespace detail {

inline double kappa_of(double z) { return std::sqrt(std::max(-z, 0.0)); }

inline std::int64_t renormalize(double& a, double& b) {
  double s = std::max(std::fabs(a), std::fabs(b));
  if (s == 0.0) return 0;
  int e = 0;
  std::frexp(s, &e);
  a = std::ldexp(a, -e);
  b = std::ldexp(b, -e);
  return e;
}

// Two Cauchy columns of y'' = (Q(t) - z) y on t in [0,1], stored in the frame
// Y = e^{-kt} y, P = e^{-kt} y_t / khat with a power-of-two tally per column.
struct Columns {
  std::vector<double> t;
  std::vector<std::array<double, 4>> state;
  std::vector<std::int64_t> tally_a, tally_b;
  double kappa = 0.0;
  double khat = 1.0;

  ExtScalar value(std::size_t i, int col) const {
    double y = state[i][col == 0 ? 0 : 2];
    std::int64_t tl = col == 0 ? tally_a[i] : tally_b[i];
    return ExtScalar::from_parts(y, tl) * ExtScalar::from_log(1, kappa * t[i]);
  }
  ExtScalar slope(std::size_t i, int col) const {
    double p = state[i][col == 0 ? 1 : 3];
    std::int64_t tl = col == 0 ? tally_a[i] : tally_b[i];
    return ExtScalar::from_parts(khat * p, tl) * ExtScalar::from_log(1, kappa * t[i]);
  }
};

template <class Q>
Columns run_columns(Q&& qt, double z, const std::vector<double>& nodes,
                    std::array<double, 4> init, const OdeTolerance& tol) {
  Columns out;
  out.kappa = kappa_of(z);
  out.khat = std::max(out.kappa, 1.0);
  const double k = out.kappa, kh = out.khat;
  out.t = nodes;
  out.state.resize(nodes.size());
  out.tally_a.assign(nodes.size(), 0);
  out.tally_b.assign(nodes.size(), 0);
  std::array<double, 4> y = {init[0], init[1] / kh, init[2], init[3] / kh};
  std::int64_t ta = renormalize(y[0], y[1]);
  std::int64_t tb = renormalize(y[2], y[3]);
  out.state[0] = y;
  out.tally_a[0] = ta;
  out.tally_b[0] = tb;
  auto rhs = [&](double t, const std::array<double, 4>& s, std::array<double, 4>& d) {
    double v = qt(t);
    if (!std::isfinite(v))
      throw InvalidPotential("potential is not finite at t=" + std::to_string(t));
    double w = (v - z) / kh;
    d[0] = kh * s[1] - k * s[0];
    d[1] = w * s[0] - k * s[1];
    d[2] = kh * s[3] - k * s[2];
    d[3] = w * s[2] - k * s[3];
  };
  DormandPrince<4> dp(tol.rtol, {tol.atol, tol.atol, tol.atol, tol.atol});
  double h = std::min(0.25 / (k + 1.0), nodes.size() > 1 ? nodes[1] - nodes[0] : 1.0);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    dp.advance(rhs, nodes[i - 1], nodes[i], y, h);
    ta += renormalize(y[0], y[1]);
    tb += renormalize(y[2], y[3]);
    out.state[i] = y;
    out.tally_a[i] = ta;
    out.tally_b[i] = tb;
  }
  return out;
}

inline std::vector<double> checkpoint_nodes(int grid_size) {
  if (grid_size < 16) throw InvalidArgument("grid_size must be at least 16");
  return uniform_grid(static_cast<std::size_t>(grid_size) + 1);
}

// Union of the checkpoint grid and requested points; index[i] locates pts[i].
inline std::vector<double> merged_nodes(const std::vector<double>& pts, int grid_size,
                                        std::vector<std::size_t>& index) {
  std::vector<double> base = checkpoint_nodes(grid_size);
  std::vector<double> all = base;
  all.insert(all.end(), pts.begin(), pts.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  index.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    index[i] = static_cast<std::size_t>(
        std::lower_bound(all.begin(), all.end(), pts[i]) - all.begin());
  return all;
}

inline double wronskian_defect(const ExtScalar& c, const ExtScalar& cp, const ExtScalar& s,
                               const ExtScalar& sp) {
  ExtScalar a = c * sp, b = cp * s;
  ExtScalar w = a - b;
  ExtScalar den = a.abs() + b.abs();
  if (den.is_zero()) return std::numeric_limits<double>::infinity();
  return ((w - ExtScalar(1.0)).abs() / den).to_double_flush();
}

// Cauchy columns from the left on the checkpoint grid.
inline Columns left_columns(const Potential& q, double z, const SturmOptions& opt) {
  return run_columns([&q](double t) { return q.eval(t); }, z, checkpoint_nodes(opt.grid_size),
                     {1.0, 0.0, 0.0, 1.0}, opt.tol);
}

}  // namespace detail

// Cauchy solutions at the far endpoint, propagated in the rescaled frame.
inline FundamentalData propagate(const Potential& q, double z, bool from_left, int grid_size,
                                 const OdeTolerance& tol = {}) {
  FundamentalData fd;
  fd.z = z;
  fd.from_left = from_left;
  auto nodes = detail::checkpoint_nodes(grid_size);
  if (from_left) {
    auto cols = detail::run_columns([&q](double t) { return q.eval(t); }, z, nodes,
                                    {1.0, 0.0, 0.0, 1.0}, tol);
    std::size_t e = nodes.size() - 1;
    fd.c0_1 = cols.value(e, 0);
    fd.c0p_1 = cols.slope(e, 0);
    fd.s0_1 = cols.value(e, 1);
    fd.s0p_1 = cols.slope(e, 1);
    fd.wronskian_defect = detail::wronskian_defect(fd.c0_1, fd.c0p_1, fd.s0_1, fd.s0p_1);
  } else {
    // t = 1 - x; y_t = -y_x, so s1 starts with y_t = -1.
    auto cols = detail::run_columns([&q](double t) { return q.eval(1.0 - t); }, z, nodes,
                                    {1.0, 0.0, 0.0, -1.0}, tol);
    std::size_t e = nodes.size() - 1;
    fd.c1_0 = cols.value(e, 0);
    fd.c1p_0 = -cols.slope(e, 0);
    fd.s1_0 = cols.value(e, 1);
    fd.s1p_0 = -cols.slope(e, 1);
    fd.wronskian_defect = detail::wronskian_defect(fd.c1_0, fd.c1p_0, fd.s1_0, fd.s1p_0);
  }
  return fd;
}

// Characteristic function Delta(z) = s0(1, z) without admissibility checks.
inline ExtScalar characteristic(const Potential& q, double z, const SturmOptions& opt = {}) {
  auto cols = detail::left_columns(q, z, opt);
  return cols.value(cols.t.size() - 1, 1);
}

inline WeylData weyl_data(const Potential& q, double z, const SturmOptions& opt = {}) {
  auto cols = detail::left_columns(q, z, opt);
  std::size_t e = cols.t.size() - 1;
  WeylData w;
  w.z = z;
  w.delta = cols.value(e, 1);
  w.d_fun = cols.value(e, 0);
  w.e_fun = cols.slope(e, 1);
  ExtScalar scale;
  for (std::size_t i = 0; i <= e; ++i) {
    ExtScalar v = cols.value(i, 1).abs();
    if (v > scale) scale = v;
  }
  if (w.delta.is_zero() || w.delta.abs() / scale < ExtScalar(1e-12))
    throw NearDirichletEigenvalue("z=" + std::to_string(z) +
                                  " is at or near a Dirichlet eigenvalue (Delta vanishes)");
  w.m_fun = (-w.d_fun / w.delta).to_double();
  w.n_fun = (-w.e_fun / w.delta).to_double();
  return w;
}

// One of the Cauchy solutions sampled on grid.
inline SolutionTrace solution_trace(const Potential& q, double z, const std::vector<double>& grid,
                                    SolutionKind which, const SturmOptions& opt = {}) {
  if (!is_valid_unit_grid(grid))
    throw InvalidArgument("grid must be strictly increasing from 0 to 1");
  SolutionTrace tr;
  tr.grid = grid;
  tr.which = which;
  tr.values.resize(grid.size());
  std::vector<std::size_t> idx;
  bool left = which == SolutionKind::C0 || which == SolutionKind::S0 ||
              which == SolutionKind::Phi;
  if (left) {
    auto nodes = detail::merged_nodes(grid, opt.grid_size, idx);
    auto cols = detail::run_columns([&q](double t) { return q.eval(t); }, z, nodes,
                                    {1.0, 0.0, 0.0, 1.0}, opt.tol);
    int col = which == SolutionKind::C0 ? 0 : 1;
    for (std::size_t i = 0; i < grid.size(); ++i) tr.values[i] = cols.value(idx[i], col);
    if (which == SolutionKind::Phi) {
      ExtScalar end = cols.value(nodes.size() - 1, 1);
      for (auto& v : tr.values) v = v / end;
      tr.values.back() = ExtScalar(1.0);
    }
  } else {
    std::vector<double> tg(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) tg[i] = 1.0 - grid[grid.size() - 1 - i];
    tg.front() = 0.0;
    tg.back() = 1.0;
    auto nodes = detail::merged_nodes(tg, opt.grid_size, idx);
    auto cols = detail::run_columns([&q](double t) { return q.eval(1.0 - t); }, z, nodes,
                                    {1.0, 0.0, 0.0, -1.0}, opt.tol);
    int col = which == SolutionKind::C1 ? 0 : 1;
    for (std::size_t i = 0; i < grid.size(); ++i)
      tr.values[grid.size() - 1 - i] = cols.value(idx[i], col);
    if (which == SolutionKind::Psi) {
      ExtScalar start = cols.value(nodes.size() - 1, 1);
      for (auto& v : tr.values) v = v / start;
      tr.values.front() = ExtScalar(1.0);
    }
  }
  return tr;
}

// Weyl solutions Psi (Psi(0)=1, Psi(1)=0) and Phi (Phi(0)=0, Phi(1)=1).
inline std::pair<SolutionTrace, SolutionTrace> weyl_traces(const Potential& q, double z,
                                                           const std::vector<double>& grid,
                                                           const SturmOptions& opt = {}) {
  (void)weyl_data(q, z, opt);
  return {solution_trace(q, z, grid, SolutionKind::Psi, opt),
          solution_trace(q, z, grid, SolutionKind::Phi, opt)};
}

// First `count` zeros of Delta: scan at pi^2/4, then bisection.
inline std::vector<double> dirichlet_values(const Potential& q, int count,
                                            const SturmOptions& opt = {}) {
  if (count < 1 || count > 64) throw InvalidArgument("dirichlet_values: count must be in [1,64]");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double sup = q.sup_norm();
  const double lo = -sup - 10.0;
  const double hi = (count + 2.0) * (count + 2.0) * pi2 + sup + 10.0;
  const double step = pi2 / 4.0;
  auto sgn = [&](double z) { return characteristic(q, z, opt).sign(); };
  std::vector<double> roots;
  double za = lo;
  int sa = sgn(za);
  if (sa == 0) throw SearchWindowError("Delta vanishes at the lower end of the search window");
  while (static_cast<int>(roots.size()) < count) {
    double zb = std::min(za + step, hi);
    int sb = sgn(zb);
    if (sb == 0) {
      roots.push_back(zb);
      za = zb + 1e-6;
      sa = sgn(za);
      continue;
    }
    if (sb != sa) {
      double a = za, b = zb;
      while (b - a > 1e-9 * 0.5) {
        double m = 0.5 * (a + b);
        int sm = sgn(m);
        if (sm == 0) {
          a = b = m;
          break;
        }
        if (sm == sa) a = m; else b = m;
      }
      roots.push_back(0.5 * (a + b));
    }
    if (zb >= hi) break;
    za = zb;
    sa = sb;
  }
  if (static_cast<int>(roots.size()) < count)
    throw SearchWindowError("found " + std::to_string(roots.size()) + " of " +
                            std::to_string(count) + " Dirichlet eigenvalues in [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return roots;
}

// Number of Dirichlet eigenvalues located exactly before switching to
// k^2 pi^2 + mean(q) in hadamard_check.
inline constexpr int kHadamardExactZeros = 24;

// [Delta(z)/Delta(0)] / prod_{k<=T}(1 - z/alpha_k)
inline double hadamard_check(const Potential& q, double z, int truncation,
                             const SturmOptions& opt = {}) {
  if (truncation < 10) throw InvalidArgument("hadamard_check: truncation must be >= 10");
  if (z == 0.0) return 1.0;
  int exact = std::min(truncation, kHadamardExactZeros);
  auto alphas = dirichlet_values(q, exact, opt);
  if (z >= alphas.front())
    throw NearDirichletEigenvalue("hadamard_check: z must lie below the first Dirichlet eigenvalue");
  WeylData wz = weyl_data(q, z, opt);
  WeylData w0 = weyl_data(q, 0.0, opt);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  double log_prod = 0.0;
  for (int k = 1; k <= truncation; ++k) {
    double a = k <= exact ? alphas[static_cast<std::size_t>(k - 1)] : k * k * pi2 + q.mean();
    log_prod += std::log1p(-z / a);
  }
  ExtScalar ratio = wz.delta / w0.delta;
  return std::exp(ratio.log_abs() - log_prod) * ratio.sign();
}

// Second-order finite differences for -v'' + (q - z) v = 0 with Dirichlet data.
inline SolutionTrace bvp_oracle(const Potential& q, double z, double left_value,
                                double right_value, const std::vector<double>& grid) {
  if (!is_valid_unit_grid(grid) || grid.size() < 3)
    throw InvalidArgument("bvp_oracle: grid must be strictly increasing from 0 to 1");
  std::size_t n = grid.size();
  std::size_t m = n - 2;
  std::vector<double> lo(m), di(m), up(m), rhs(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t i = j + 1;
    double h0 = grid[i] - grid[i - 1], h1 = grid[i + 1] - grid[i];
    double s = 2.0 / (h0 + h1);
    lo[j] = -s / h0;
    up[j] = -s / h1;
    di[j] = s / h0 + s / h1 + q.eval(grid[i]) - z;
  }
  rhs[0] -= lo[0] * left_value;
  rhs[m - 1] -= up[m - 1] * right_value;
  double scale = 0.0;
  for (double d : di) scale = std::max(scale, std::fabs(d));
  for (std::size_t j = 1; j < m; ++j) {
    if (std::fabs(di[j - 1]) <= 1e-14 * scale)
      throw SingularSystem("bvp_oracle: singular tridiagonal system");
    double w = lo[j] / di[j - 1];
    di[j] -= w * up[j - 1];
    rhs[j] -= w * rhs[j - 1];
  }
  if (std::fabs(di[m - 1]) <= 1e-14 * scale)
    throw SingularSystem("bvp_oracle: singular tridiagonal system");
  std::vector<double> v(m);
  v[m - 1] = rhs[m - 1] / di[m - 1];
  for (std::size_t j = m - 1; j-- > 0;) v[j] = (rhs[j] - up[j] * v[j + 1]) / di[j];
  SolutionTrace tr;
  tr.grid = grid;
  tr.values.resize(n);
  tr.values[0] = left_value;
  tr.values[n - 1] = right_value;
  for (std::size_t j = 0; j < m; ++j) tr.values[j + 1] = v[j];
  if (left_value == 1.0 && right_value == 0.0) tr.which = SolutionKind::Psi;
  else if (left_value == 0.0 && right_value == 1.0) tr.which = SolutionKind::Phi;
  return tr;
}

namespace detail {

struct MnPass {
  double value = 0.0;
  std::vector<double> log_weight;  // ln of d(M - N)/dJ over each checkpoint segment
};

// One sweep of the Wronskian ODE. atol_j[i] is the absolute tolerance on J
// in segment i (in the renormalized frame).
inline MnPass mn_pass(const Potential& q, double z, const SturmOptions& opt,
                      const std::vector<double>& nodes, const std::vector<double>& atol_j) {
  const double k = kappa_of(z);
  const double kh = std::max(k, 1.0);
  // state: Y1, P1 (s1 in t = 1-x), Y2, P2 (s0(1-x) in t), J
  std::array<double, 5> y = {0.0, -1.0 / kh, 0.0, 1.0 / kh, 0.0};
  std::int64_t t1 = renormalize(y[0], y[1]);
  std::int64_t t2 = renormalize(y[2], y[3]);
  auto rhs = [&](double t, const std::array<double, 5>& s, std::array<double, 5>& d) {
    double qa = q.eval(1.0 - t);  // q at x
    double qb = q.eval(t);        // q at 1 - x
    double wa = (qa - z) / kh, wb = (qb - z) / kh;
    d[0] = kh * s[1] - k * s[0];
    d[1] = wa * s[0] - k * s[1];
    d[2] = kh * s[3] - k * s[2];
    d[3] = wb * s[2] - k * s[3];
    d[4] = -2.0 * k * s[4] + (qa - qb) * s[0] * s[2];
  };
  const double a = opt.tol.atol;
  DormandPrince<5> dp(opt.tol.rtol, {a, a, a, a, atol_j[0]});
  std::vector<std::int64_t> shift(nodes.size(), 0);
  double h = std::min(0.25 / (k + 1.0), nodes[1]);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    dp.set_atol(4, atol_j[i - 1]);
    dp.advance(rhs, nodes[i - 1], nodes[i], y, h);
    std::int64_t e1 = renormalize(y[0], y[1]);
    std::int64_t e2 = renormalize(y[2], y[3]);
    y[4] = std::ldexp(y[4], static_cast<int>(-e1 - e2));
    shift[i] = e1 + e2;
    t1 += e1;
    t2 += e2;
  }
  // M - N = J / Delta^2 with Delta = -s1(0).
  MnPass r;
  r.value = (ExtScalar::from_parts(y[4], t2 - t1) / ExtScalar(y[0] * y[0])).to_double_flush();
  const double ln2 = std::log(2.0);
  const double base = ln2 * static_cast<double>(t2 - t1) - 2.0 * std::log(std::fabs(y[0]));
  r.log_weight.assign(nodes.size() - 1, 0.0);
  double later = 0.0;  // rescalings applied at and after the end of segment i
  for (std::size_t i = nodes.size() - 1; i >= 1; --i) {
    later += static_cast<double>(shift[i]);
    r.log_weight[i - 1] = base - ln2 * later - 2.0 * k * (1.0 - nodes[i]);
  }
  return r;
}

}  // namespace detail

// M_q(z) - N_q(z) without subtracting M and N. Integrates the Wronskian of
// s1(x) and s0(1-x) from x=1 down to 0 together with the accumulated
// integral of (q(x)-q(1-x)) s1(x) s0(1-x); every term is stored relative to
// its own growth so exponentially small differences keep full precision.
// A pilot sweep fixes the size of the result; later sweeps bound the
// absolute error of J in each segment by rtol times that size.
inline double mn_difference(const Potential& q, double z, const SturmOptions& opt = {}) {
  if (q.is_symmetric()) return 0.0;
  const double k = detail::kappa_of(z);
  auto nodes = detail::checkpoint_nodes(opt.grid_size);
  const std::size_t segs = nodes.size() - 1;
  const double rtol = opt.tol.rtol;
  std::vector<double> atol(segs, std::max(rtol * q.asymmetry() / (2.0 * k + 1.0), 1e-300));
  auto pass = detail::mn_pass(q, z, opt, nodes, atol);
  for (int it = 0; it < 4; ++it) {
    double f = std::fabs(pass.value);
    if (f == 0.0) return 0.0;
    for (std::size_t i = 0; i < segs; ++i) {
      double la = std::log(0.01 * rtol * f) - pass.log_weight[i];
      atol[i] = std::exp(std::clamp(la, -690.0, 690.0));
    }
    auto next = detail::mn_pass(q, z, opt, nodes, atol);
    bool settled = std::fabs(next.value - pass.value) <= 0.1 * std::fabs(next.value);
    pass = std::move(next);
    if (settled) break;
  }
  return pass.value;
}

}  // namespace steklov
