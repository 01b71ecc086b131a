#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mntest/errors.hpp"

namespace mntest {

using Count = std::int64_t;

// Observed cell counts for one group. Immutable once built; sum(counts) == n.
class CountVector {
 public:
  explicit CountVector(std::vector<Count> counts) : counts_(std::move(counts)) {
    if (counts_.empty()) throw LengthMismatch("count vector must have at least one category");
    for (Count c : counts_) {
      if (c < 0) throw NegativeCount("cell counts must be nonnegative");
      n_ += c;
    }
  }

  std::span<const Count> counts() const noexcept { return counts_; }
  Count operator[](std::size_t i) const { return counts_[i]; }
  std::size_t k() const noexcept { return counts_.size(); }
  Count n() const noexcept { return n_; }

 private:
  std::vector<Count> counts_;
  Count n_ = 0;
};

// Two groups of counts over one shared category index space.
class TwoSampleCounts {
 public:
  TwoSampleCounts(CountVector group1, CountVector group2)
      : g1_(std::move(group1)), g2_(std::move(group2)) {
    if (g1_.k() != g2_.k()) throw LengthMismatch("groups have different numbers of categories");
    if (g1_.n() <= 0 || g2_.n() <= 0) throw EmptyGroup("each group needs a positive total count");
  }

  std::size_t k() const noexcept { return g1_.k(); }
  const CountVector& group1() const noexcept { return g1_; }
  const CountVector& group2() const noexcept { return g2_; }
  Count n1() const noexcept { return g1_.n(); }
  Count n2() const noexcept { return g2_.n(); }

  // Same data with the groups exchanged.
  TwoSampleCounts swapped() const { return TwoSampleCounts(g2_, g1_); }

 private:
  CountVector g1_;
  CountVector g2_;
};

inline TwoSampleCounts make_two_sample(std::vector<Count> counts1, std::vector<Count> counts2) {
  if (counts1.size() != counts2.size()) {
    throw LengthMismatch("count sequences differ in length (" + std::to_string(counts1.size()) +
                         " vs " + std::to_string(counts2.size()) + ")");
  }
  return TwoSampleCounts(CountVector(std::move(counts1)), CountVector(std::move(counts2)));
}

// Neumaier-compensated sum.
inline double compensated_sum(std::span<const double> xs) noexcept {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    comp += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

// Cell probabilities; entries in [0,1] summing to one within 1e-12.
class ProbabilityVector {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw LengthMismatch("probability vector must be nonempty");
    for (double p : probs_) {
      if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probabilities must lie in [0,1]");
    }
    if (std::fabs(compensated_sum(probs_) - 1.0) > kSumTolerance) {
      throw DomainError("probabilities must sum to 1");
    }
  }

  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::size_t k() const noexcept { return probs_.size(); }

 private:
  std::vector<double> probs_;
};

enum class Method { proposed, chi2, zelterman, bs };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::proposed: return "proposed";
    case Method::chi2: return "chi2";
    case Method::zelterman: return "zelterman";
    case Method::bs: return "bs";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "proposed") return Method::proposed;
  if (s == "chi2") return Method::chi2;
  if (s == "zelterman") return Method::zelterman;
  if (s == "bs") return Method::bs;
  throw ConfigError("unknown method '" + s + "'");
}

struct TestOutcome {
  Method method = Method::proposed;
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.05;
  std::map<std::string, double> diagnostics;
};

/// Pooled cell estimates (N1i + N2i) / (n1 + n2).
inline std::vector<double> pooled_phat(const TwoSampleCounts& ts) {
  const double total = static_cast<double>(ts.n1() + ts.n2());
  std::vector<double> out(ts.k());
  for (std::size_t i = 0; i < ts.k(); ++i) {
    out[i] = static_cast<double>(ts.group1()[i] + ts.group2()[i]) / total;
  }
  return out;
}

}  // namespace mntest
