#include <gtest/gtest.h>

#include <cmath>

#include "gamow/positive_definite.hpp"

using namespace gamow;

TEST(PdInequality, GaussPowerPasses) {
  RandomRasterPairs src(1);
  const CheckReport r = check_pd_inequality(gauss_power(1.0, 0.5), src, 200);
  EXPECT_TRUE(r.passed);
  EXPECT_TRUE(r.witnesses.empty());
  EXPECT_GE(r.values.at("min_slack"), -1e-6);
  EXPECT_EQ(r.samples_used, 200u);
}

TEST(PdInequality, RieszAndConstantPass) {
  RandomRasterPairs a(2), b(3);
  EXPECT_TRUE(check_pd_inequality(power(-0.5), a, 100).passed);
  EXPECT_TRUE(check_pd_inequality(constant(), b, 100).passed);
}

TEST(PdInequality, ConstantKernelSlackIsSquaredAreaGap) {
  RandomRasterPairs src(4);
  CellTable t(constant(), src.pitch());
  for (int i = 0; i < 20; ++i) {
    const auto [F, G] = src.next();
    const double d = area(F) - area(G);
    EXPECT_NEAR(pd_slack(t, F, G), d * d, 1e-12 * (area(F) + area(G)) * (area(F) + area(G)));
  }
}

TEST(PdInequality, EqualSetsGiveZeroSlack) {
  RandomRasterPairs src(5);
  CellTable t(gauss_power(1.0, 0.5), src.pitch());
  for (int i = 0; i < 20; ++i) {
    const RasterSet F = src.next_set();
    EXPECT_EQ(pd_slack(t, F, F), 0.0);
  }
}

TEST(PdInequality, NonAdmissibleRejected) {
  RandomRasterPairs src(6);
  EXPECT_THROW(check_pd_inequality(power(-2.5), src, 1), PreconditionError);
}

TEST(PdInequality, Deterministic) {
  RandomRasterPairs a(77), b(77);
  for (int i = 0; i < 5; ++i) {
    const auto [F1, G1] = a.next();
    const auto [F2, G2] = b.next();
    EXPECT_EQ(F1.mask, F2.mask);
    EXPECT_EQ(G1.mask, G2.mask);
  }
}

TEST(PdStripSearch, IndicatorHasWitness) {
  const CheckReport r = search_pd_strip_witness(indicator(1.0));
  ASSERT_FALSE(r.passed);
  ASSERT_EQ(r.witnesses.size(), 1u);
  const double s = r.values.at("spacing");
  // thin long strips: 3 k1(0) - 4 k1(s) + 2 k1(2s) with k1(x) = 2 sqrt(1 - x^2)
  // is negative for 1/2 <= s < 0.66
  EXPECT_GT(s, 0.4);
  EXPECT_LT(s, 0.75);
  // recompute the witness slack from the three interactions separately
  const auto [F, G] = strip_pair(s, 1.0 / 16, 4.0, 1.0 / 32);
  const KernelSpec k = indicator(1.0);
  const double direct = riesz_interaction(k, F, F) + riesz_interaction(k, G, G) - 2.0 * riesz_interaction(k, F, G);
  EXPECT_NEAR(direct, r.values.at("min_slack"), 1e-9);
  EXPECT_LT(direct, 0.0);
  // the violation persists on a finer lattice
  const auto [F2, G2] = strip_pair(s, 1.0 / 16, 4.0, 1.0 / 64);
  CellTable fine(k, 1.0 / 64);
  EXPECT_LT(pd_slack(fine, F2, G2), 0.0);
}

TEST(PdStripSearch, GaussianHasNone) {
  const CheckReport r = search_pd_strip_witness(gauss_power(1.0, 0.0));
  EXPECT_TRUE(r.passed);
  EXPECT_GE(r.values.at("min_slack"), 0.0);
}

TEST(ConcentrationBound, RandomPairs) {
  RandomRasterPairs src(8);
  const CheckReport r = check_concentration_bound(power(-0.5), src, 50);
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.extremal_ratio, 1.0);
  EXPECT_GT(r.extremal_ratio, 0.0);
}

TEST(ConcentrationBound, DiskAgainstItselfIsTightest) {
  // F = G = disk: R(D, D) <= |D| phi(|D|), with phi(|D|) the potential at the
  // centre; the ratio is well below 1 but clearly positive
  const RasterSet D = rasterize(disk(0.5), 1.0 / 32);
  const KernelSpec k = power(-0.5);
  const double lhs = riesz_interaction(k, D, D);
  const double rhs = area(D) * concentration_bound_phi(k, area(D));
  EXPECT_LT(lhs, rhs);
  EXPECT_GT(lhs, 0.5 * rhs);
}
