#include <gtest/gtest.h>

#include <random>

#include "mntest/neighborhood.hpp"

using namespace mntest;

namespace {

// Smallest grid point with p_delta >= alpha.
double grid_delta_star(double T, double alpha, double step) {
  for (int j = 0;; ++j) {
    const double d = j * step;
    if (std_normal_sf(T - d) >= alpha) return d;
  }
}

}  // namespace

TEST(PDelta, Examples) {
  const auto ts = make_two_sample({2, 0}, {0, 2});
  EXPECT_EQ(p_delta(ts, 0.0), proposed_test(ts, 0.05).outcome.p_value);
  EXPECT_NEAR(p_delta(ts, std::sqrt(2.0)), 0.5, 1e-15);
  EXPECT_NEAR(p_delta(ts, 1.4142), 0.5, 1e-4);
  EXPECT_NEAR(p_delta(ts, std::sqrt(2.0) + 10.0), 1.0, 1e-10);
  EXPECT_THROW(p_delta(ts, -0.1), DomainError);
}

TEST(DeltaStar, Examples) {
  EXPECT_EQ(delta_star(make_two_sample({3, 4, 1}, {3, 4, 1}), 0.05), 0.0);
  EXPECT_NEAR(delta_star_from_T(3.0, 0.05), 1.3551, 1e-3);
  EXPECT_NEAR(delta_star_from_T(3.0, 0.05), grid_delta_star(3.0, 0.05, 1e-4), 1e-4);
  EXPECT_THROW(delta_star_from_T(3.0, 0.0), DomainError);
  EXPECT_THROW(delta_star_from_T(3.0, 1.0), DomainError);
}

TEST(DeltaStar, InverseIdentityAndGrid) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> T(1.7, 40.0), A(0.001, 0.3);
  for (int rep = 0; rep < 2000; ++rep) {
    const double t = T(rng), alpha = A(rng);
    if (t <= std_normal_upper_quantile(alpha)) continue;
    const double d = delta_star_from_T(t, alpha);
    EXPECT_GE(p_delta_from_T(t, d), alpha);
    EXPECT_NEAR(p_delta_from_T(t, d), alpha, 1e-10);
  }
  for (double t : {1.7, 2.5, 5.0, 9.0}) {
    EXPECT_NEAR(delta_star_from_T(t, 0.05), grid_delta_star(t, 0.05, 1e-4), 1e-4);
  }
}

// A larger alpha asks for a larger p_delta, and p_delta grows with delta, so
// delta_star can only grow with alpha.
TEST(DeltaStar, NondecreasingInAlpha) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> T(-3.0, 20.0);
  for (int rep = 0; rep < 500; ++rep) {
    const double t = T(rng);
    double prev = delta_star_from_T(t, 0.001);
    for (double a = 0.002; a < 0.5; a += 0.001) {
      const double d = delta_star_from_T(t, a);
      EXPECT_GE(d, prev);
      prev = d;
    }
  }
}

TEST(Curve, MonotoneAndStrictBelowSaturation) {
  const auto ts = make_two_sample({9, 1, 0, 4, 0}, {0, 2, 6, 1, 3});
  const double T = proposed_T(ts);
  const auto c = neighborhood_curve(ts, default_delta_max(T), kDefaultCurveStep, 0.05);
  ASSERT_EQ(c.deltas.size(), c.p_values.size());
  for (std::size_t i = 1; i < c.deltas.size(); ++i) {
    EXPECT_GT(c.deltas[i], c.deltas[i - 1]);
    EXPECT_GE(c.p_values[i], c.p_values[i - 1]);
    if (c.p_values[i] < 1.0 - 1e-12) {
      EXPECT_GT(c.p_values[i], c.p_values[i - 1]);
    }
  }
  EXPECT_EQ(c.deltas.front(), 0.0);
  EXPECT_NEAR(c.deltas.back(), T + 4.0, kDefaultCurveStep);
}

TEST(Curve, GridContainingDeltaStar) {
  const double T = 4.2;
  const double ds = delta_star_from_T(T, 0.05);
  const auto c = neighborhood_curve_from_T(T, {0.0, ds, ds + 1.0}, 0.05);
  EXPECT_GE(c.p_values[1], 0.05);
  EXPECT_EQ(c.delta_star, ds);
}

TEST(Curve, TwoPointExample) {
  const auto c = neighborhood_curve_from_T(std::sqrt(2.0), {0.0, 1.4142}, 0.05);
  EXPECT_NEAR(c.p_values[0], 0.0786, 1e-4);
  EXPECT_NEAR(c.p_values[1], 0.5, 1e-4);
}

TEST(Grid, Construction) {
  const auto g = delta_grid(1.0, 0.1);
  ASSERT_EQ(g.size(), 11u);
  EXPECT_DOUBLE_EQ(g[10], 1.0);
  EXPECT_DOUBLE_EQ(g[3], 0.30000000000000004);
  EXPECT_THROW(delta_grid(0.0, 0.1), DomainError);
  EXPECT_THROW(delta_grid(1.0, 0.0), DomainError);
  EXPECT_EQ(default_delta_max(-10.0), kDefaultCurveStep);
}
