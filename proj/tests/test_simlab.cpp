#include <gtest/gtest.h>

#include "mntest/experiment_io.hpp"
#include "mntest/simlab.hpp"

using namespace mntest;

namespace {

void expect_valid(const ProbabilityVector& p) {
  long double s = 0;
  for (std::size_t i = 0; i < p.k(); ++i) {
    EXPECT_GE(p[i], 0.0);
    s += p[i];
  }
  EXPECT_NEAR(s, 1.0, 1e-12);
}

}  // namespace

TEST(Generators, Zipf) {
  const auto u = zipf_probs(7, 0.0);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(u[i], 1.0 / 7, 1e-15);
  const auto z = zipf_probs(2, 1.0);
  EXPECT_NEAR(z[0], 2.0 / 3, 1e-15);
  EXPECT_NEAR(z[1], 1.0 / 3, 1e-15);
  const auto d = zipf_probs(1000, 0.45);
  for (std::size_t i = 1; i < d.k(); ++i) EXPECT_LT(d[i], d[i - 1]);
  expect_valid(d);
  EXPECT_THROW(zipf_probs(0, 1.0), DomainError);
  EXPECT_THROW(zipf_probs(3, -1.0), DomainError);
}

TEST(Generators, Swap) {
  const auto z = zipf_probs(3, 1.0);  // (1, 1/2, 1/3) / (11/6)
  const auto s = swap_entries(z, 0, 2);
  EXPECT_NEAR(s[0], 2.0 / 11, 1e-15);
  EXPECT_NEAR(s[1], 3.0 / 11, 1e-15);
  EXPECT_NEAR(s[2], 6.0 / 11, 1e-15);
  const auto back = swap_entries(s, 0, 2);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back[i], z[i]);
  const auto u = uniform_probs(4);
  const auto us = swap_entries(u, 1, 3);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(us[i], u[i]);
  EXPECT_THROW(swap_entries(u, 1, 1), IndexError);
  EXPECT_THROW(swap_entries(u, 1, 4), IndexError);
}

TEST(Generators, SpikeAndZero) {
  const auto s0 = spike_merge(6, 0);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(s0[i], 1.0 / 6, 1e-15);
  const auto s = spike_merge(5, 2);
  const double want[] = {0, 0, 0.6, 0.2, 0.2};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(s[i], want[i], 1e-15);
  const auto z = zero_renorm(5, 2);
  const double wz[] = {0, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(z[i], wz[i], 1e-15);
  const auto z0 = zero_renorm(8, 0);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(z0[i], 0.125, 1e-15);
  for (std::size_t k : {2u, 10u, 1000u, 100000u})
    for (std::size_t b : {0u, 1u, 7u, 400u}) {
      if (b + 1 < k) expect_valid(spike_merge(k, b));
      if (b < k) expect_valid(zero_renorm(k, b));
    }
  EXPECT_THROW(spike_merge(5, 4), IndexError);
  EXPECT_THROW(zero_renorm(5, 5), IndexError);
}

TEST(Generators, BuildFromSpec) {
  const auto g = GeneratorSpec::swap(GeneratorSpec::zipf(0.45), 1, 100);
  const auto p = build_probs(g, 1000);
  const auto base = zipf_probs(1000, 0.45);
  EXPECT_EQ(p[0], base[99]);
  EXPECT_EQ(p[99], base[0]);
  // m = 1 is the null row
  const auto same = build_probs(GeneratorSpec::swap(GeneratorSpec::zipf(0.45), 1, 1), 1000);
  for (std::size_t i = 0; i < 1000; ++i) EXPECT_EQ(same[i], base[i]);
  EXPECT_THROW(build_probs(GeneratorSpec::swap(GeneratorSpec::uniform(), 0, 2), 10), IndexError);
  EXPECT_THROW(build_probs(GeneratorSpec::swap(GeneratorSpec::uniform(), 1, 11), 10), IndexError);
}

TEST(Presets, Ratios) {
  const auto e4 = presets::experiment4(100);
  EXPECT_EQ(e4.scenario_null.n1, 400);
  EXPECT_EQ(e4.scenario_alt->generator.kind, GeneratorKind::zero_renorm);
  EXPECT_EQ(e4.scenario_alt->generator.b, 50u);
  const auto e5 = presets::experiment5(1000);
  EXPECT_EQ(e5.scenario_null.n2, 4000);
  EXPECT_EQ(e5.scenario_alt->generator.swap_j, 5u);
  const auto e6 = presets::experiment6(4000);
  EXPECT_EQ(e6.scenario_null.n1, 1000);
  EXPECT_EQ(e6.scenario_alt->generator.b, 500u);
  const auto e7 = presets::experiment7(4000);
  EXPECT_EQ(e7.scenario_null.n1, 1000);
  EXPECT_EQ(e7.scenario_alt->generator.swap_j, 500u);
  EXPECT_EQ(presets::size_ratio10(GeneratorSpec::uniform(), 1000).scenario_null.n1, 100);
  for (const auto& c : {e4, e5, e6, e7}) EXPECT_NO_THROW(validate(c));
}

TEST(Validate, Rejections) {
  auto c = presets::experiment1(100, 50, 10);
  c.reps = 99;
  EXPECT_THROW(validate(c), ConfigError);
  c.reps = 100;
  c.alpha = 1.0;
  EXPECT_THROW(validate(c), ConfigError);
  c.alpha = 0.05;
  c.scenario_alt->n2 = 51;
  EXPECT_THROW(validate(c), ConfigError);
  c.scenario_alt->n2 = 50;
  c.methods = {Method::zelterman};
  c.permutations = 10;
  EXPECT_THROW(validate(c), ConfigError);
  c.zelterman_moments = ZeltermanMoments::exact;
  EXPECT_NO_THROW(validate(c));
  c.threads = 0;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(RunExperiment, ReportInvariants) {
  auto c = presets::experiment2(200, 100, 10);
  c.methods = {Method::proposed, Method::chi2, Method::bs};
  c.reps = 400;
  c.seed = 3;
  c.reference = {{"proposed", 0.5}};
  const auto r = run_experiment(c);
  EXPECT_EQ(r.reps_completed, 400);
  ASSERT_EQ(r.results.size(), 3u);
  for (const auto& m : r.results) {
    EXPECT_GE(m.rate, 0.0);
    EXPECT_LE(m.rate, 1.0);
    EXPECT_DOUBLE_EQ(m.mc_standard_error, std::sqrt(m.rate * (1 - m.rate) / 400));
    EXPECT_EQ(m.rate, m.rejections / 400.0);
  }
  ASSERT_TRUE(r.results[0].reference.has_value());
  EXPECT_EQ(*r.results[0].reference, 0.5);
  EXPECT_FALSE(r.results[1].reference.has_value());
}

TEST(RunExperiment, ThreadCountInvariance) {
  auto c = presets::experiment1(300, 60, 30);
  c.methods = {Method::proposed, Method::chi2, Method::zelterman, Method::bs};
  c.reps = 200;
  c.permutations = 200;
  c.seed = 11;
  std::string first;
  for (int threads : {1, 2, 8}) {
    c.threads = threads;
    const std::string s = reports_to_json({run_experiment(c)}).dump(2);
    if (first.empty()) first = s;
    EXPECT_EQ(s, first) << "threads=" << threads;
  }
  c.seed = 12;
  c.threads = 1;
  EXPECT_NE(reports_to_json({run_experiment(c)}).dump(2), first);
}

TEST(RunExperiment, NullSizeIsNearAlpha) {
  auto c = presets::size_ratio10(GeneratorSpec::uniform(), 1000);
  c.reps = 2000;
  c.seed = 5;
  const auto r = run_experiment(c);
  EXPECT_NEAR(r.results[0].rate, 0.05, 0.02);
}

TEST(RunExperiment, DegenerateReplicatesCountAsNonRejections) {
  // n = 1 per group: sigma_hat is zero whenever the two draws differ
  ExperimentConfig c;
  c.scenario_null = {GeneratorSpec::uniform(), 50, 1, 1};
  c.reps = 200;
  const auto r = run_experiment(c);
  EXPECT_GT(r.results[0].degenerate, 150);
  EXPECT_LE(r.results[0].rejections + r.results[0].degenerate, 200);
}

TEST(Normality, KsDistance) {
  EXPECT_EQ(ks_distance_normal({}), 1.0);
  EXPECT_NEAR(ks_distance_normal({0.0}), 0.5, 1e-15);
  auto c = presets::size_study(GeneratorSpec::uniform(), 1000, 500);
  c.reps = 100;
  c.seed = 8;
  EXPECT_LE(null_normality_diagnostic(c), 0.2);
  // all mass on one cell: T is the same constant in every replicate
  ExperimentConfig point;
  point.scenario_null = {GeneratorSpec::zero(9), 10, 50, 50};
  point.reps = 100;
  const double ks = null_normality_diagnostic(point);
  EXPECT_GE(ks, 0.5);
  // D = -2/n, sigma_hat^2 = 4(2n-1)/n^3, so T = -sqrt(n/(2n-1))
  EXPECT_NEAR(ks, std_normal_sf(-std::sqrt(50.0 / 99.0)), 1e-12);
  c.scenario_alt = c.scenario_null;
  EXPECT_THROW(null_normality_diagnostic(c), ConfigError);
}
