#include <gtest/gtest.h>

#include <cmath>

#include "steklov/localization.hpp"

using namespace steklov;

namespace {

WarpingProfile symmetric_base(int n = 3) {
  return WarpingProfile({constant_term(1.0), edge_term(1.0, 1, 1)}, n, 0.0);  // 1 + x(1-x)
}

ProfileTerm flea_term() { return PolyTerm{{0, 0, 0, 0, 0, 0, 0, 1.0}}; }  // x^7

WarpingProfile iia(double c0, double c1, int n = 3) {
  return WarpingProfile({PolyTerm{{c0, c1}}}, n, 0.0);
}

const std::vector<double>& grid() {
  static const auto g = uniform_grid(kDefaultTracePoints);
  return g;
}

}  // namespace

TEST(Classify, SymmetricIsBoth) {
  Model m(symmetric_base());
  for (double k : {3.0, 10.0, 25.0}) {
    auto tp = eigenfunction_pair(m, k * k, grid());
    for (auto* tr : {&tp.plus, &tp.minus}) {
      auto r = classify(*tr, m.p);
      EXPECT_EQ(r.dominant, Dominant::Both);
      EXPECT_NEAR(r.mass_split, 0.5, 1e-10);
      EXPECT_NEAR(r.log_w0, r.log_w1, 1e-10);
      // (f0^{1/4} w(0))^2 = 1/2 when the boundary mass splits evenly
      double s = std::pow(m.f0, 0.25) * tr->w_values.front().to_double();
      EXPECT_NEAR(s * s, 0.5, 1e-12);
    }
  }
}

TEST(Classify, UnequalEndsInDimensionTwo) {
  Model m(iia(1.0, 3.0, 2));  // f(0) = 1 < f(1) = 4
  auto tp = eigenfunction_pair(m, 400.0, grid());
  auto rp = classify(tp.plus, m.p);
  auto rm = classify(tp.minus, m.p);
  EXPECT_EQ(rp.dominant, Dominant::Gamma0);
  EXPECT_EQ(rm.dominant, Dominant::Gamma1);
  EXPECT_NEAR(rp.decay_rate_0, 20.0, 1.0);
  EXPECT_NEAR(rm.decay_rate_1, 20.0, 1.0);
}

TEST(Classify, Errors) {
  Model m(symmetric_base());
  auto tr = eigenfunction_trace(m, 100.0, Branch::Plus, grid(), Normalization::BulkL2);
  EXPECT_THROW(classify(tr, m.p), InvalidArgument);
  auto z = eigenfunction_trace(m, 100.0, Branch::Plus, grid());
  for (auto& v : z.w_values) v = ExtScalar();
  EXPECT_THROW(classify(z, m.p), DegenerateTrace);
}

TEST(Classify, MassSplitInvariants) {
  for (const auto& p : {symmetric_base(), iia(1.0, 0.5), iia(1.5, -0.5, 4)}) {
    Model m(p);
    for (double k : {1.0, 7.0, 30.0}) {
      auto tp = eigenfunction_pair(m, k * k, grid());
      for (auto* tr : {&tp.plus, &tp.minus}) {
        auto r = classify(*tr, m.p);
        EXPECT_GE(r.mass_split, 0.0);
        EXPECT_LE(r.mass_split, 1.0);
        EXPECT_EQ(r.dominant == Dominant::Both, std::fabs(r.mass_split - 0.5) <= kBothThreshold);
      }
    }
  }
}

TEST(Sides, PredictionsMatchComputedTraces) {
  std::vector<WarpingProfile> ps = {
      iia(1.0, 0.5), iia(1.5, -0.5),
      WarpingProfile({constant_term(1.0), edge_term(1.0, 1, 2)}, 3, 0.0),
      WarpingProfile({constant_term(1.0), edge_term(1.0, 2, 1)}, 3, 0.0),
      WarpingProfile({constant_term(1.0), BumpTerm{0.5, 0.25, 0.02}}, 2, -50.0),
      WarpingProfile({constant_term(1.0), BumpTerm{0.5, 0.75, 0.02}}, 2, -50.0)};
  for (const auto& p : ps) {
    Model m(p);
    auto side = branch_side_prediction(case_constants(p));
    auto tp = eigenfunction_pair(m, 400.0, grid());
    EXPECT_EQ(classify(tp.plus, m.p).dominant, side.plus) << p.label();
    EXPECT_EQ(classify(tp.minus, m.p).dominant, side.minus) << p.label();
  }
  EXPECT_THROW(branch_side_prediction(case_constants(symmetric_base())), CaseMismatch);
}

TEST(Bound, SymmetricTemplateHolds) {
  Model m(symmetric_base());
  auto cm = case_constants(m.p);
  for (double k : {5.0, 10.0, 20.0}) {
    auto tp = eigenfunction_pair(m, k * k, grid());
    for (auto* tr : {&tp.plus, &tp.minus}) {
      auto t = bound_template(cm, tr->branch, k * k);
      EXPECT_EQ(t.kind, TemplateKind::MainSymmetric);
      auto r = bound_check(*tr, t);
      ASSERT_TRUE(r.has_value());
      EXPECT_TRUE(bound_holds(*r)) << *r;
    }
  }
}

TEST(Bound, FlatCylinderProfiles) {
  Model m(iia(1.0, 0.0, 2));
  auto cm = case_constants(m.p);
  auto tp = eigenfunction_pair(m, 100.0, grid());
  auto t = bound_template(cm, Branch::Plus, 100.0);
  EXPECT_EQ(t.kind, TemplateKind::Main20Equal);
  EXPECT_LE(*bound_check(tp.plus, t), 1e-9);
  EXPECT_LE(*bound_check(tp.minus, bound_template(cm, Branch::Minus, 100.0)), 1e-9);
}

TEST(Bound, AsymmetricResidualIsBoundedInMu) {
  // One constant matched at the dominant end leaves an O(1) offset on the far
  // side; the envelope shape holds when that offset does not grow with mu.
  for (const auto& p : {iia(1.5, -0.5), iia(1.0, 3.0, 2),
                        WarpingProfile({constant_term(1.0), edge_term(1.0, 1, 2)}, 3, 0.0),
                        WarpingProfile({constant_term(1.0), BumpTerm{0.5, 0.25, 0.02}}, 2, -50.0)}) {
    Model m(p);
    auto cm = case_constants(p);
    std::vector<double> res;
    for (double k : {20.0, 30.0, 40.0}) {
      auto tr = eigenfunction_trace(m, k * k, Branch::Plus, grid());
      res.push_back(*bound_check(tr, bound_template(cm, Branch::Plus, k * k)));
    }
    EXPECT_LE(res[2], res[0] + 0.1) << p.label();
    EXPECT_LE(res[2], res[1] + 0.1) << p.label();
    EXPECT_LT(res[2], 5.0) << p.label();
  }
}

TEST(Bound, Guards) {
  Model m(symmetric_base());
  auto cm = case_constants(m.p);
  auto t0 = eigenfunction_trace(m, 0.0, Branch::Plus, grid());
  EXPECT_FALSE(bound_check(t0, bound_template(cm, Branch::Plus, 0.0)).has_value());
  auto tr = eigenfunction_trace(m, 100.0, Branch::Plus, grid());
  EXPECT_THROW(bound_check(tr, bound_template(cm, Branch::Minus, 100.0)), CaseMismatch);
  EXPECT_THROW(bound_check(tr, bound_template(cm, Branch::Plus, 81.0)), CaseMismatch);
  WarpingProfile c({constant_term(1.0), BumpTerm{0.3, 0.0, 0.6}}, 3, 0.0);
  EXPECT_THROW(bound_template(case_constants(c), Branch::Plus, 100.0), CaseMismatch);
}

TEST(Bound, TemplatesArePositive) {
  std::vector<WarpingProfile> ps = {symmetric_base(), iia(1.0, 0.5), iia(1.0, 3.0, 2),
                                    WarpingProfile({constant_term(1.0), BumpTerm{0.5, 0.25, 0.02}}, 2, -50.0)};
  for (const auto& p : ps) {
    auto cm = case_constants(p);
    for (auto b : {Branch::Plus, Branch::Minus})
      for (double mu : {1.0, 400.0, 1e4}) {
        auto t = bound_template(cm, b, mu);
        for (double x : grid()) EXPECT_GT(t.value(x), 0.0);
      }
  }
}

TEST(Decay, RatesTowardResidualComponent) {
  for (const auto& p : {iia(1.0, 3.0, 2), iia(1.0, 0.5), iia(1.5, -0.5)}) {
    Model m(p);
    auto tp = eigenfunction_pair(m, 400.0, grid());
    for (auto* tr : {&tp.plus, &tp.minus}) {
      auto r = classify(*tr, m.p);
      ASSERT_NE(r.dominant, Dominant::Both);
      double rate = r.dominant == Dominant::Gamma0 ? r.decay_rate_0 : r.decay_rate_1;
      EXPECT_NEAR(rate, 20.0, 0.05 * 20.0) << p.label();
    }
  }
}

TEST(Norm, BulkNormScalesLikeMuToMinusQuarter) {
  for (const auto& p : {symmetric_base(), iia(1.0, 0.5), WarpingProfile({constant_term(1.0), edge_term(1.0, 1, 2)}, 3, 0.0)}) {
    Model m(p);
    double lo = 1e300, hi = 0;
    for (double k = 2; k <= 60; k += 2) {
      auto tp = eigenfunction_pair(m, k * k, grid());
      for (auto* tr : {&tp.plus, &tp.minus}) {
        double s = std::pow(k * k, 0.25) * tr->bulk_norm;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
    }
    EXPECT_LT(hi / lo, 3.0) << p.label();
  }
}

TEST(Flea, SweepLocalizesAndMStarDecreases) {
  auto spec = transversal_spectrum(SpectrumSpec::circle(1.0), 41);
  std::vector<double> deltas = {0.0, 1e-4, 1e-3, 1e-2};
  auto rep = flea_sweep(symmetric_base(), flea_term(), deltas, spec, {2});
  ASSERT_EQ(rep.entries.size(), deltas.size() * spec.entries.size());
  for (std::size_t mi = 0; mi < spec.entries.size(); ++mi) {
    const auto& e = rep.entries[mi];
    EXPECT_EQ(e.plus.dominant, Dominant::Both);
    EXPECT_EQ(e.minus.dominant, Dominant::Both);
    EXPECT_NEAR(e.plus.log_w0, e.plus.log_w1, 1e-10);
  }
  EXPECT_FALSE(rep.summary[0].m_star.has_value());
  for (std::size_t di = 1; di < deltas.size(); ++di) {
    const auto& s = rep.summary[di];
    EXPECT_EQ(s.model.tag, CaseTag::IIA);
    ASSERT_TRUE(s.m_star.has_value());
    EXPECT_TRUE(s.prediction_holds);
    EXPECT_EQ(s.prediction->plus, Dominant::Gamma0);
    if (di > 1) {
      EXPECT_LE(*s.m_star, *rep.summary[di - 1].m_star);
    }
  }
  EXPECT_LE(*rep.summary[2].m_star, 15u);
}

TEST(Flea, WorkerCountDoesNotChangeResults) {
  auto spec = transversal_spectrum(SpectrumSpec::circle(1.0), 12);
  auto a = flea_sweep(symmetric_base(), flea_term(), {1e-3}, spec, {1});
  auto b = flea_sweep(symmetric_base(), flea_term(), {1e-3}, spec, {3});
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].plus.mass_split, b.entries[i].plus.mass_split);
    EXPECT_EQ(a.entries[i].gap.log_abs(), b.entries[i].gap.log_abs());
  }
  EXPECT_EQ(a.summary[0].m_star, b.summary[0].m_star);
}

TEST(Flea, RejectsAsymmetricBase) {
  auto spec = transversal_spectrum(SpectrumSpec::circle(1.0), 3);
  EXPECT_THROW(flea_sweep(iia(1.0, 0.5), flea_term(), {0.0}, spec), InvalidArgument);
  EXPECT_THROW(flea_sweep(symmetric_base(), flea_term(), {}, spec), InvalidArgument);
}
