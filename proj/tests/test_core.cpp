#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <map>
#include <random>

#include "mntest/counts.hpp"
#include "mntest/errors.hpp"
#include "mntest/moments.hpp"
#include "mntest/normal.hpp"
#include "mntest/random.hpp"

using namespace mntest;
using HP = boost::multiprecision::cpp_bin_float_50;

namespace {

// Upper normal tail in 50-digit arithmetic.
HP hp_sf(const HP& z) { return erfc(z / sqrt(HP(2))) / 2; }

// z with hp_sf(z) = tail, by bisection.
HP hp_upper_quantile(const HP& tail) {
  HP lo = -40, hi = 40;
  for (int i = 0; i < 300; ++i) {
    HP mid = (lo + hi) / 2;
    if (hp_sf(mid) > tail) lo = mid; else hi = mid;
  }
  return (lo + hi) / 2;
}

// z with P(Z <= z) = q; works from the lower tail so tiny q keep their digits.
HP hp_lower_quantile(const HP& q) { return -hp_upper_quantile(q); }

}  // namespace

TEST(Counts, MakeTwoSample) {
  auto ts = make_two_sample({1, 1}, {1, 1});
  EXPECT_EQ(ts.k(), 2u);
  EXPECT_EQ(ts.n1(), 2);
  EXPECT_EQ(ts.n2(), 2);
  auto d = make_two_sample({2, 0}, {0, 2});
  EXPECT_EQ(d.n1(), 2);
  EXPECT_EQ(d.n2(), 2);
}

TEST(Counts, Rejections) {
  EXPECT_THROW(make_two_sample({1}, {0}), EmptyGroup);
  EXPECT_THROW(make_two_sample({1, 2}, {1}), LengthMismatch);
  EXPECT_THROW(make_two_sample({1, -1}, {1, 1}), NegativeCount);
  EXPECT_THROW(make_two_sample({}, {}), LengthMismatch);
  EXPECT_THROW(ProbabilityVector({0.5, 0.6}), DomainError);
  EXPECT_THROW(ProbabilityVector({1.5, -0.5}), DomainError);
  EXPECT_NO_THROW(ProbabilityVector({0.25, 0.75}));
}

TEST(Counts, PooledPhat) {
  for (auto [a, b] : std::vector<std::pair<std::vector<Count>, std::vector<Count>>>{
           {{1, 1}, {1, 1}}, {{2, 0}, {0, 2}}, {{3, 1}, {1, 3}}}) {
    auto p = pooled_phat(make_two_sample(a, b));
    EXPECT_DOUBLE_EQ(p[0], 0.5);
    EXPECT_DOUBLE_EQ(p[1], 0.5);
  }
}

TEST(Counts, PooledPhatSumsToOne) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> kdist(1, 200), cdist(0, 9);
  for (int rep = 0; rep < 500; ++rep) {
    const int k = kdist(rng);
    std::vector<Count> a(k), b(k);
    for (int i = 0; i < k; ++i) {
      a[i] = cdist(rng);
      b[i] = cdist(rng);
    }
    a[0] += 1;
    b[0] += 1;
    const auto p = pooled_phat(make_two_sample(a, b));
    double s = 0.0;
    for (double v : p) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Normal, Examples) {
  EXPECT_EQ(std_normal_sf(0.0), 0.5);
  EXPECT_NEAR(std_normal_quantile(0.95), 1.6449, 1e-4);
  EXPECT_THROW(std_normal_quantile(0.0), DomainError);
  EXPECT_THROW(std_normal_quantile(1.0), DomainError);
  EXPECT_THROW(std_normal_quantile(std::nan("")), DomainError);
}

TEST(Normal, SfMatchesHighPrecision) {
  for (double z = -8.0; z <= 30.0; z += 0.037) {
    const double ref = static_cast<double>(hp_sf(HP(z)));
    // the tail is ill-conditioned: a relative error eps in z becomes z^2 eps
    EXPECT_NEAR(std_normal_sf(z), ref, 4e-16 * (2.0 + z * z) * ref) << "z=" << z;
  }
}

TEST(Normal, QuantileMatchesHighPrecision) {
  for (double q : {1e-300, 1e-100, 1e-20, 1e-10, 1e-5, 0.001, 0.01, 0.025, 0.05, 0.1, 0.3,
                   0.5, 0.7, 0.9, 0.95, 0.975, 0.99, 0.999999}) {
    const double ref = static_cast<double>(hp_lower_quantile(HP(q)));
    const double got = std_normal_quantile(q);
    EXPECT_NEAR(got, ref, 2e-15 * (1.0 + std::fabs(ref))) << "q=" << q;
  }
  const double z95 = static_cast<double>(hp_upper_quantile(HP("0.05")));
  EXPECT_NEAR(std_normal_upper_quantile(0.05), z95, 1e-14);
}

TEST(Normal, SymmetryAndMonotonicity) {
  double prev = 1.0;
  for (double z = -10.0; z <= 10.0; z += 0.01) {
    EXPECT_NEAR(std_normal_sf(z) + std_normal_sf(-z), 1.0, 1e-12);
    const double s = std_normal_sf(z);
    if (z > -7.0) EXPECT_LT(s, prev); else EXPECT_LE(s, prev);  // rounds to 1 far in the left tail
    prev = s;
  }
}

TEST(Normal, InverseIdentity) {
  for (double q = 0.001; q < 1.0; q += 0.001) {
    EXPECT_NEAR(std_normal_sf(std_normal_quantile(q)), 1.0 - q, 1e-14);
  }
}

TEST(Random, StreamsAreReproducibleAndDistinct) {
  auto a = derive_stream(42, 7);
  auto b = derive_stream(42, 7);
  auto c = derive_stream(42, 8);
  auto d = derive_stream(42, 7, StreamTag::permutation);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
}

TEST(Random, DegenerateAndSingleDraw) {
  auto rng = derive_stream(1, 0);
  const ProbabilityVector point({1.0, 0.0, 0.0, 0.0});
  for (int r = 0; r < 100; ++r) {
    const auto c = sample_multinomial(point, 37, rng);
    EXPECT_EQ(c[0], 37);
    EXPECT_EQ(c.n(), 37);
  }
  const ProbabilityVector u({0.25, 0.25, 0.25, 0.25});
  for (int r = 0; r < 100; ++r) {
    const auto c = sample_multinomial(u, 1, rng);
    int ones = 0;
    for (std::size_t i = 0; i < c.k(); ++i) ones += c[i] == 1;
    EXPECT_EQ(ones, 1);
  }
}

TEST(Random, ZeroCellsNeverHit) {
  auto rng = derive_stream(3, 0);
  const ProbabilityVector p({0.0, 0.5, 0.0, 0.5, 0.0});
  for (int r = 0; r < 1000; ++r) {
    const auto c = sample_multinomial(p, 9, rng);
    EXPECT_EQ(c[0] + c[2] + c[4], 0);
    EXPECT_EQ(c.n(), 9);
  }
}

namespace {

void check_against_enumeration(const ProbabilityVector& p, Count n, int draws, std::uint64_t seed) {
  std::map<std::vector<Count>, int> freq;
  auto rng = derive_stream(seed, 0);
  for (int r = 0; r < draws; ++r) {
    const auto c = sample_multinomial(p, n, rng);
    freq[std::vector<Count>(c.counts().begin(), c.counts().end())]++;
  }
  const auto outcomes = enumerate_multinomial(p, n);
  int seen = 0;
  for (const auto& o : outcomes) {
    const double f = static_cast<double>(freq[o.counts]) / draws;
    const double se = std::sqrt(o.probability * (1.0 - o.probability) / draws);
    EXPECT_LE(std::fabs(f - o.probability), 4.0 * se + 1e-12);
    seen += freq[o.counts];
  }
  EXPECT_EQ(seen, draws);  // nothing outside the support
}

}  // namespace

TEST(Random, SamplerMatchesEnumeration) {
  check_against_enumeration(ProbabilityVector({1.0 / 3, 1.0 / 3, 1.0 / 3}), 2, 100000, 11);
  check_against_enumeration(ProbabilityVector({0.1, 0.2, 0.3, 0.4}), 3, 100000, 12);
  check_against_enumeration(ProbabilityVector({0.05, 0.0, 0.95}), 4, 100000, 13);
}

TEST(Random, ColumnSplitIsHypergeometric) {
  // totals (2,1,3), take 3 of 6 units: enumerate all C(6,3) subsets.
  const std::vector<Count> totals{2, 1, 3};
  std::map<std::vector<Count>, double> exact;
  const std::vector<int> unit_col{0, 0, 1, 2, 2, 2};
  for (int mask = 0; mask < 64; ++mask) {
    if (__builtin_popcount(mask) != 3) continue;
    std::vector<Count> x(3, 0);
    for (int u = 0; u < 6; ++u)
      if (mask >> u & 1) ++x[unit_col[u]];
    exact[x] += 1.0 / 20.0;
  }
  std::map<std::vector<Count>, int> freq;
  auto rng = derive_stream(5, 0);
  std::vector<Count> out;
  const int draws = 100000;
  for (int r = 0; r < draws; ++r) {
    sample_column_split(totals, 3, rng, out);
    Count s = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_LE(out[i], totals[i]);
      s += out[i];
    }
    EXPECT_EQ(s, 3);
    freq[out]++;
  }
  for (const auto& [x, p] : exact) {
    const double f = static_cast<double>(freq[x]) / draws;
    EXPECT_LE(std::fabs(f - p), 4.0 * std::sqrt(p * (1 - p) / draws)) ;
  }
}
