#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mntest/counts.hpp"
#include "mntest/errors.hpp"
#include "mntest/normal.hpp"
#include "mntest/parallel.hpp"
#include "mntest/random.hpp"
#include "mntest/statistics.hpp"

namespace mntest {

// ---------------------------------------------------------------------------
// Probability-vector generators
// ---------------------------------------------------------------------------

inline ProbabilityVector uniform_probs(std::size_t k) {
  if (k == 0) throw DomainError("k must be positive");
  return ProbabilityVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

/// p_i proportional to 1 / i^gamma, i = 1..k.
inline ProbabilityVector zipf_probs(std::size_t k, double gamma) {
  if (k == 0) throw DomainError("k must be positive");
  if (!(gamma >= 0.0)) throw DomainError("zipf exponent must be nonnegative");
  std::vector<double> p(k);
  for (std::size_t i = 0; i < k; ++i) p[i] = std::pow(static_cast<double>(i + 1), -gamma);
  const double total = compensated_sum(p);
  for (double& v : p) v /= total;
  return ProbabilityVector(std::move(p));
}

/// Exchange entries i and j (0-based).
inline ProbabilityVector swap_entries(const ProbabilityVector& p, std::size_t i, std::size_t j) {
  if (i == j || i >= p.k() || j >= p.k()) {
    throw IndexError("swap indices must be distinct and below k");
  }
  std::vector<double> v(p.probs().begin(), p.probs().end());
  std::swap(v[i], v[j]);
  return ProbabilityVector(std::move(v));
}

/// Uniform base with the first b cells' mass moved onto cell b+1:
/// (0, ..., 0, (b+1)/k, 1/k, ..., 1/k).
inline ProbabilityVector spike_merge(std::size_t k, std::size_t b) {
  if (b + 1 >= k) throw IndexError("spike_merge needs b + 1 < k");
  const double kk = static_cast<double>(k);
  std::vector<double> p(k, 1.0 / kk);
  for (std::size_t i = 0; i < b; ++i) p[i] = 0.0;
  p[b] = static_cast<double>(b + 1) / kk;
  return ProbabilityVector(std::move(p));
}

/// First b cells zeroed, the rest uniform at 1/(k-b).
inline ProbabilityVector zero_renorm(std::size_t k, std::size_t b) {
  if (b >= k) throw IndexError("zero_renorm needs b < k");
  std::vector<double> p(k, 1.0 / static_cast<double>(k - b));
  for (std::size_t i = 0; i < b; ++i) p[i] = 0.0;
  return ProbabilityVector(std::move(p));
}

// ---------------------------------------------------------------------------
// Scenario and experiment descriptions
// ---------------------------------------------------------------------------

enum class GeneratorKind { uniform, zipf, swap, spike_merge, zero_renorm };

// Positions in `swap_i` / `swap_j` are 1-based, matching how the experiment
// definitions are written; they are converted when the vector is built.
struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::uniform;
  double gamma = 0.0;
  std::size_t b = 0;
  std::size_t swap_i = 1;
  std::size_t swap_j = 1;
  std::shared_ptr<const GeneratorSpec> base;  // swap only

  static GeneratorSpec uniform() { return {}; }
  static GeneratorSpec zipf(double gamma) {
    GeneratorSpec g;
    g.kind = GeneratorKind::zipf;
    g.gamma = gamma;
    return g;
  }
  static GeneratorSpec swap(GeneratorSpec base, std::size_t i, std::size_t j) {
    GeneratorSpec g;
    g.kind = GeneratorKind::swap;
    g.swap_i = i;
    g.swap_j = j;
    g.base = std::make_shared<const GeneratorSpec>(std::move(base));
    return g;
  }
  static GeneratorSpec spike(std::size_t b) {
    GeneratorSpec g;
    g.kind = GeneratorKind::spike_merge;
    g.b = b;
    return g;
  }
  static GeneratorSpec zero(std::size_t b) {
    GeneratorSpec g;
    g.kind = GeneratorKind::zero_renorm;
    g.b = b;
    return g;
  }
};

struct ScenarioSpec {
  GeneratorSpec generator;
  std::size_t k = 0;
  Count n1 = 0;
  Count n2 = 0;
};

inline ProbabilityVector build_probs(const GeneratorSpec& g, std::size_t k) {
  switch (g.kind) {
    case GeneratorKind::uniform: return uniform_probs(k);
    case GeneratorKind::zipf: return zipf_probs(k, g.gamma);
    case GeneratorKind::spike_merge: return spike_merge(k, g.b);
    case GeneratorKind::zero_renorm: return zero_renorm(k, g.b);
    case GeneratorKind::swap: {
      if (!g.base) throw ConfigError("swap generator needs a base");
      if (g.swap_i == 0 || g.swap_j == 0) throw IndexError("swap positions are 1-based");
      const auto base = build_probs(*g.base, k);
      // A swap of a position with itself is the null configuration.
      if (g.swap_i == g.swap_j) {
        if (g.swap_i > k) throw IndexError("swap position beyond k");
        return base;
      }
      return swap_entries(base, g.swap_i - 1, g.swap_j - 1);
    }
  }
  throw ConfigError("unknown generator");
}

inline ProbabilityVector build_probs(const ScenarioSpec& s) { return build_probs(s.generator, s.k); }

struct ExperimentConfig {
  std::string name;
  ScenarioSpec scenario_null;
  std::optional<ScenarioSpec> scenario_alt;  // absent: P2 = P1
  std::vector<Method> methods{Method::proposed};
  int reps = 10000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int threads = 1;
  int permutations = kDefaultPermutations;
  CellRule cell_rule = CellRule::expected_positive;
  ZeltermanMoments zelterman_moments = ZeltermanMoments::permutation;
  // Optional published rates per method, echoed into the report.
  std::map<std::string, double> reference;
};

inline constexpr int kMinReportableReps = 100;

inline void validate(const ExperimentConfig& cfg) {
  const auto& a = cfg.scenario_null;
  if (a.k == 0) throw ConfigError("scenario k must be positive");
  if (a.n1 <= 0 || a.n2 <= 0) throw ConfigError("scenario sample sizes must be positive");
  if (cfg.scenario_alt) {
    const auto& b = *cfg.scenario_alt;
    if (b.k != a.k || b.n1 != a.n1 || b.n2 != a.n2) {
      throw ConfigError("null and alternative scenarios disagree on k, n1 or n2");
    }
  }
  if (cfg.reps < kMinReportableReps) {
    throw ConfigError("reps must be at least " + std::to_string(kMinReportableReps));
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (cfg.threads < 1) throw ConfigError("threads must be positive");
  if (cfg.methods.empty()) throw ConfigError("at least one method is required");
  const bool perm_zel =
      std::find(cfg.methods.begin(), cfg.methods.end(), Method::zelterman) != cfg.methods.end() &&
      cfg.zelterman_moments == ZeltermanMoments::permutation;
  if (perm_zel && cfg.permutations < kMinPermutations) {
    throw ConfigError("permutations must be at least " + std::to_string(kMinPermutations));
  }
}

struct MethodResult {
  Method method = Method::proposed;
  std::int64_t rejections = 0;
  std::int64_t degenerate = 0;  // replicates where the statistic was undefined
  double rate = 0.0;
  double mc_standard_error = 0.0;
  std::optional<double> reference;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<MethodResult> results;
  std::int64_t reps_completed = 0;
  double wall_time_seconds = 0.0;
  // Proposed-test T per replicate (NaN where degenerate); filled only on request.
  std::vector<double> proposed_T;
};

namespace detail {

struct ReplicateResult {
  std::uint32_t reject_mask = 0;
  std::uint32_t degenerate_mask = 0;
  double T = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace detail

/// Monte Carlo rejection rates. Replicate r draws from its own stream derived
/// from (seed, r), so results do not depend on the thread count.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, bool keep_statistics = false) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const ProbabilityVector p1 = build_probs(cfg.scenario_null);
  const ProbabilityVector p2 = cfg.scenario_alt ? build_probs(*cfg.scenario_alt) : p1;
  const Count n1 = cfg.scenario_null.n1, n2 = cfg.scenario_null.n2;

  std::vector<detail::ReplicateResult> per_rep(static_cast<std::size_t>(cfg.reps));
  detail::parallel_for(cfg.reps, cfg.threads, [&](std::int64_t r) {
    Engine rng = derive_stream(cfg.seed, static_cast<std::uint64_t>(r));
    const CountVector c1 = sample_multinomial(p1, n1, rng);
    const CountVector c2 = sample_multinomial(p2, n2, rng);
    const TwoSampleCounts ts(c1, c2);
    TestOptions opt;
    opt.alpha = cfg.alpha;
    opt.permutations = cfg.permutations;
    opt.cell_rule = cfg.cell_rule;
    opt.zelterman_moments = cfg.zelterman_moments;
    opt.seed = rng();
    auto& out = per_rep[static_cast<std::size_t>(r)];
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      try {
        const TestOutcome o = run_method(ts, cfg.methods[m], opt);
        if (o.reject) out.reject_mask |= 1u << m;
        if (cfg.methods[m] == Method::proposed) out.T = o.statistic;
      } catch (const Error& e) {
        if (!is_numeric_degeneracy(e)) throw;
        out.degenerate_mask |= 1u << m;
      }
    }
  });

  ExperimentReport rep;
  rep.config = cfg;
  rep.reps_completed = cfg.reps;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    MethodResult mr;
    mr.method = cfg.methods[m];
    for (const auto& r : per_rep) {
      mr.rejections += (r.reject_mask >> m) & 1u;
      mr.degenerate += (r.degenerate_mask >> m) & 1u;
    }
    mr.rate = static_cast<double>(mr.rejections) / static_cast<double>(cfg.reps);
    mr.mc_standard_error = std::sqrt(mr.rate * (1.0 - mr.rate) / static_cast<double>(cfg.reps));
    if (auto it = cfg.reference.find(method_name(mr.method)); it != cfg.reference.end()) {
      mr.reference = it->second;
    }
    rep.results.push_back(mr);
  }
  if (keep_statistics) {
    rep.proposed_T.reserve(per_rep.size());
    for (const auto& r : per_rep) rep.proposed_T.push_back(r.T);
  }
  rep.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

/// Kolmogorov-Smirnov distance between the sample and N(0,1). Non-finite
/// values are dropped; an empty sample is at distance 1.
inline double ks_distance_normal(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return 1.0;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = std_normal_cdf(values[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// KS distance of the simulated null distribution of T from N(0,1).
inline double null_normality_diagnostic(const ExperimentConfig& cfg) {
  if (cfg.scenario_alt) throw ConfigError("normality diagnostic needs a null configuration");
  ExperimentConfig c = cfg;
  c.methods = {Method::proposed};
  return ks_distance_normal(run_experiment(c, true).proposed_T);
}

// ---------------------------------------------------------------------------
// Experiment presets. Dimensions follow the published designs; every preset
// returns the alternative in scenario_alt and leaves P1 in scenario_null.
// ---------------------------------------------------------------------------

namespace presets {

inline constexpr double kZipfGamma = 0.45;

inline ScenarioSpec scenario(GeneratorSpec g, std::size_t k, Count n) { return {std::move(g), k, n, n}; }

/// Size study: P1 = P2 from `base`, equal group sizes.
inline ExperimentConfig size_study(GeneratorSpec base, std::size_t k, Count n) {
  ExperimentConfig c;
  c.scenario_null = scenario(std::move(base), k, n);
  return c;
}

/// Null-only sizes with k / n_c = 10.
inline ExperimentConfig size_ratio10(GeneratorSpec base, std::size_t k) {
  return size_study(std::move(base), k, static_cast<Count>(k / 10));
}

/// Experiment 1: zipf(0.45) vs the same vector with entries 1 and m swapped.
inline ExperimentConfig experiment1(std::size_t k, Count n, std::size_t m) {
  ExperimentConfig c;
  const auto z = GeneratorSpec::zipf(kZipfGamma);
  c.scenario_null = scenario(z, k, n);
  c.scenario_alt = scenario(GeneratorSpec::swap(z, 1, m), k, n);
  return c;
}

/// Experiment 2: uniform vs spike_merge(b).
inline ExperimentConfig experiment2(std::size_t k, Count n, std::size_t b) {
  ExperimentConfig c;
  c.scenario_null = scenario(GeneratorSpec::uniform(), k, n);
  c.scenario_alt = scenario(GeneratorSpec::spike(b), k, n);
  return c;
}

/// Experiment 3: uniform vs zero_renorm(b).
inline ExperimentConfig experiment3(std::size_t k, Count n, std::size_t b) {
  ExperimentConfig c;
  c.scenario_null = scenario(GeneratorSpec::uniform(), k, n);
  c.scenario_alt = scenario(GeneratorSpec::zero(b), k, n);
  return c;
}

/// Experiment 4: Experiment 3 design with b = 50 and n_c = 4k.
inline ExperimentConfig experiment4(std::size_t k, std::size_t b = 50) {
  return experiment3(k, static_cast<Count>(4 * k), b);
}

/// Experiment 5: Experiment 1 design with m = 5 and n_c = 4k.
inline ExperimentConfig experiment5(std::size_t k, std::size_t m = 5) {
  return experiment1(k, static_cast<Count>(4 * k), m);
}

/// Experiment 6: Experiment 3 design with b = 500 and k = 4 n_c.
inline ExperimentConfig experiment6(std::size_t k, std::size_t b = 500) {
  return experiment3(k, static_cast<Count>(k / 4), b);
}

/// Experiment 7: Experiment 1 design with m = 500 and k = 4 n_c.
inline ExperimentConfig experiment7(std::size_t k, std::size_t m = 500) {
  return experiment1(k, static_cast<Count>(k / 4), m);
}

}  // namespace presets

}  // namespace mntest
