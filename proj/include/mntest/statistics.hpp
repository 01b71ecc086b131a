#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "mntest/counts.hpp"
#include "mntest/errors.hpp"
#include "mntest/normal.hpp"
#include "mntest/random.hpp"

namespace mntest {

// ---------------------------------------------------------------------------
// Proposed distance statistic
// ---------------------------------------------------------------------------

/// Per-cell unbiased estimate of (p1i - p2i)^2 under the Poisson model:
/// (x1/n1 - x2/n2)^2 - x1/n1^2 - x2/n2^2. Negative values are legal.
inline double f_star(Count x1, Count x2, Count n1, Count n2) {
  const double a = static_cast<double>(x1) / static_cast<double>(n1);
  const double b = static_cast<double>(x2) / static_cast<double>(n2);
  const double d = a - b;
  return d * d - a / static_cast<double>(n1) - b / static_cast<double>(n2);
}

/// Sum of f_star over all cells; estimates ||P1 - P2||^2.
inline double statistic_D(const TwoSampleCounts& ts) {
  const auto c1 = ts.group1().counts();
  const auto c2 = ts.group2().counts();
  double sum = 0.0;
  for (std::size_t i = 0; i < ts.k(); ++i) {
    if (c1[i] == 0 && c2[i] == 0) continue;
    sum += f_star(c1[i], c2[i], ts.n1(), ts.n2());
  }
  return sum;
}

/// Plug-in estimate of the null variance of D:
///   sum_i sum_c (2/n_c^2)(phat_ci^2 - phat_ci/n_c) + (4/(n1 n2)) sum_i phat_1i phat_2i.
/// Each group term equals 2 N(N-1)/n_c^4, so the result is never negative.
inline double sigma_hat_sq(const TwoSampleCounts& ts) {
  const auto c1 = ts.group1().counts();
  const auto c2 = ts.group2().counts();
  const double n1 = static_cast<double>(ts.n1());
  const double n2 = static_cast<double>(ts.n2());
  double own1 = 0.0, own2 = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < ts.k(); ++i) {
    const double a = static_cast<double>(c1[i]);
    const double b = static_cast<double>(c2[i]);
    own1 += a * (a - 1.0);
    own2 += b * (b - 1.0);
    cross += a * b;
  }
  const double n1sq = n1 * n1, n2sq = n2 * n2;
  return 2.0 * own1 / (n1sq * n1sq) + 2.0 * own2 / (n2sq * n2sq) +
         4.0 * cross / (n1sq * n2sq);
}

/// Null standardizing variance 2 sum_i (p1i/n1 + p2i/n2)^2 for known
/// probabilities.
inline double sigma_sq_true(std::span<const double> p1, std::span<const double> p2, Count n1,
                            Count n2) {
  if (p1.size() != p2.size()) throw LengthMismatch("probability vectors differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    const double v = p1[i] / static_cast<double>(n1) + p2[i] / static_cast<double>(n2);
    s += v * v;
  }
  return 2.0 * s;
}

struct ProposedTestDetail {
  double D = 0.0;
  double sigma_hat_sq = 0.0;
  double T = 0.0;
  // D is also the unbiased estimate of ||xi||^2 under Poissonization.
  double xi_norm_estimate = 0.0;
};

struct ProposedResult {
  TestOutcome outcome;
  ProposedTestDetail detail;
};

/// T = D / sigma_hat; one-sided upper p-value. Rejects when p < alpha, which
/// is T > z_{1-alpha} up to rounding at the boundary.
/// Throws DegenerateVariance when sigma_hat_sq is zero (every count <= 1 and
/// the supports are disjoint).
inline ProposedResult proposed_test(const TwoSampleCounts& ts, double alpha) {
  ProposedResult r;
  r.detail.D = statistic_D(ts);
  r.detail.sigma_hat_sq = sigma_hat_sq(ts);
  if (!(r.detail.sigma_hat_sq > 0.0)) {
    throw DegenerateVariance("variance estimate is zero; data too sparse for the normal approximation");
  }
  r.detail.T = r.detail.D / std::sqrt(r.detail.sigma_hat_sq);
  r.detail.xi_norm_estimate = r.detail.D;

  r.outcome.method = Method::proposed;
  r.outcome.alpha = alpha;
  r.outcome.statistic = r.detail.T;
  r.outcome.p_value = std_normal_sf(r.detail.T);
  r.outcome.reject = r.outcome.p_value < alpha;
  r.outcome.diagnostics = {{"D", r.detail.D}, {"sigma_hat", std::sqrt(r.detail.sigma_hat_sq)},
                           {"sigma_hat_sq", r.detail.sigma_hat_sq}};
  return r;
}

/// T alone, for callers that only need the statistic.
inline double proposed_T(const TwoSampleCounts& ts) {
  const double v = sigma_hat_sq(ts);
  if (!(v > 0.0)) throw DegenerateVariance("variance estimate is zero");
  return statistic_D(ts) / std::sqrt(v);
}

// ---------------------------------------------------------------------------
// Pearson chi-square
// ---------------------------------------------------------------------------

enum class CellRule {
  expected_positive,  // every cell with positive pooled count (standard homogeneity test)
  observed_positive,  // only cells with N_ci > 0, as the statistic is sometimes written
};

inline CellRule parse_cell_rule(const std::string& s) {
  if (s == "expected" || s == "expected_positive") return CellRule::expected_positive;
  if (s == "observed" || s == "observed_positive") return CellRule::observed_positive;
  throw ConfigError("unknown cell rule '" + s + "'");
}

inline TestOutcome pearson_chi2(const TwoSampleCounts& ts, double alpha,
                                CellRule rule = CellRule::expected_positive) {
  const auto c1 = ts.group1().counts();
  const auto c2 = ts.group2().counts();
  const double n1 = static_cast<double>(ts.n1());
  const double n2 = static_cast<double>(ts.n2());
  const double total = n1 + n2;
  double chi2 = 0.0;
  std::size_t support = 0;
  for (std::size_t i = 0; i < ts.k(); ++i) {
    const Count pooled = c1[i] + c2[i];
    if (pooled == 0) continue;
    ++support;
    const double p = static_cast<double>(pooled) / total;
    const double e1 = n1 * p, e2 = n2 * p;
    const double d1 = static_cast<double>(c1[i]) - e1;
    const double d2 = static_cast<double>(c2[i]) - e2;
    if (rule == CellRule::expected_positive || c1[i] > 0) chi2 += d1 * d1 / e1;
    if (rule == CellRule::expected_positive || c2[i] > 0) chi2 += d2 * d2 / e2;
  }
  if (support < 2) {
    throw InsufficientSupport("chi-square needs at least two categories with positive pooled count");
  }
  const double df = static_cast<double>(support - 1);
  TestOutcome out;
  out.method = Method::chi2;
  out.alpha = alpha;
  out.statistic = chi2;
  out.p_value = boost::math::gamma_q(0.5 * df, 0.5 * chi2);
  out.reject = out.p_value < alpha;
  out.diagnostics = {{"degrees_of_freedom", df}};
  return out;
}

// ---------------------------------------------------------------------------
// Zelterman's standardized statistic
// ---------------------------------------------------------------------------

namespace detail {

// Contribution of one column with pooled total t when group 1 holds x of it.
inline double zelterman_column(double x, double t, double n1, double n2) {
  const double total = n1 + n2;
  const double e1 = n1 * t / total;
  const double e2 = n2 * t / total;
  const double y = t - x;
  return ((x - e1) * (x - e1) - x) / e1 + ((y - e2) * (y - e2) - y) / e2;
}

inline double zelterman_raw(std::span<const Count> group1, std::span<const Count> totals,
                            double n1, double n2) {
  double s = 0.0;
  for (std::size_t i = 0; i < totals.size(); ++i) {
    if (totals[i] == 0) continue;
    s += zelterman_column(static_cast<double>(group1[i]), static_cast<double>(totals[i]), n1, n2);
  }
  return s;
}

inline std::vector<Count> column_totals(const TwoSampleCounts& ts) {
  std::vector<Count> t(ts.k());
  for (std::size_t i = 0; i < ts.k(); ++i) t[i] = ts.group1()[i] + ts.group2()[i];
  return t;
}

// x^(a), as a double
inline double falling(double x, int a) {
  double r = 1.0;
  for (int j = 0; j < a; ++j) r *= (x - j);
  return r;
}

}  // namespace detail

/// Raw D_Z^2 = sum_c sum_{i: pooled>0} [(N_ci - Nhat_ci)^2 - N_ci] / Nhat_ci.
inline double zelterman_statistic(const TwoSampleCounts& ts) {
  const auto totals = detail::column_totals(ts);
  return detail::zelterman_raw(ts.group1().counts(), totals, static_cast<double>(ts.n1()),
                               static_cast<double>(ts.n2()));
}

/// D_Z^2 over random relabelings of the n1+n2 unit observations, with both
/// margins held fixed.
inline std::vector<double> zelterman_permutation_values(const TwoSampleCounts& ts,
                                                        int n_permutations, std::uint64_t seed) {
  const auto totals = detail::column_totals(ts);
  const double n1 = static_cast<double>(ts.n1()), n2 = static_cast<double>(ts.n2());
  Engine rng = derive_stream(seed, 0, StreamTag::permutation);
  std::vector<Count> g1;
  std::vector<double> values(static_cast<std::size_t>(n_permutations));
  for (auto& v : values) {
    sample_column_split(totals, ts.n1(), rng, g1);
    v = detail::zelterman_raw(g1, totals, n1, n2);
  }
  return values;
}

struct ZeltermanMomentsValue {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact mean and variance of D_Z^2 under the relabeling distribution, i.e.
/// conditional on both margins. Group-1 column counts are then multivariate
/// hypergeometric with factorial moments
///   E[X_i^(a) X_j^(b)] = rho_{a+b} t_i^(a) t_j^(b),  rho_m = n1^(m) / N^(m),
/// and every column term is quadratic in X_i, so O(k) work suffices.
inline ZeltermanMomentsValue zelterman_conditional_moments(const TwoSampleCounts& ts) {
  const auto totals = detail::column_totals(ts);
  const double n1 = static_cast<double>(ts.n1()), n2 = static_cast<double>(ts.n2());
  const double total = n1 + n2;

  double rho[5];
  rho[0] = 1.0;
  for (int m = 1; m <= 4; ++m) {
    const double num = n1 - (m - 1), den = total - (m - 1);
    rho[m] = (num <= 0.0) ? 0.0 : rho[m - 1] * num / den;
  }
  // E[X^(a) X^(b)] for a single column, in terms of falling factorials:
  // X^(a) X^(b) = sum_j C(a,j) C(b,j) j! X^(a+b-j).
  auto same_column = [&](int a, int b, double t) {
    if (a == 1 && b == 1) return rho[2] * detail::falling(t, 2) + rho[1] * t;
    if (a == 2 && b == 2) {
      return rho[4] * detail::falling(t, 4) + 4.0 * rho[3] * detail::falling(t, 3) +
             2.0 * rho[2] * detail::falling(t, 2);
    }
    return rho[3] * detail::falling(t, 3) + 2.0 * rho[2] * detail::falling(t, 2);  // (1,2)
  };

  ZeltermanMomentsValue out;
  double A[3] = {0.0, 0.0, 0.0};         // A_a = sum_i c_ia t_i^(a)
  double diag_prod[3][3] = {};           // sum_i c_ia c_ib t_i^(a) t_i^(b)
  double var_diag = 0.0, scale = 0.0;
  for (Count ti : totals) {
    if (ti == 0) continue;
    const double t = static_cast<double>(ti);
    // g(x) = c0 + c1 x + c2 x(x-1), recovered from g(0), g(1), g(2).
    const double g0 = detail::zelterman_column(0.0, t, n1, n2);
    const double g1 = detail::zelterman_column(1.0, t, n1, n2);
    const double g2 = detail::zelterman_column(2.0, t, n1, n2);
    const double c[3] = {g0, g1 - g0, 0.5 * (g2 - 2.0 * g1 + g0)};
    const double tf[3] = {1.0, t, detail::falling(t, 2)};

    out.mean += c[0] + c[1] * rho[1] * tf[1] + c[2] * rho[2] * tf[2];
    double v = 0.0;
    for (int a = 1; a <= 2; ++a) {
      A[a] += c[a] * tf[a];
      for (int b = 1; b <= 2; ++b) {
        diag_prod[a][b] += c[a] * c[b] * tf[a] * tf[b];
        v += c[a] * c[b] * (same_column(a, b, t) - rho[a] * rho[b] * tf[a] * tf[b]);
      }
    }
    var_diag += v;
    scale += std::fabs(v);
  }
  double var_off = 0.0;
  for (int a = 1; a <= 2; ++a) {
    for (int b = 1; b <= 2; ++b) {
      var_off += (rho[a + b] - rho[a] * rho[b]) * (A[a] * A[b] - diag_prod[a][b]);
    }
  }
  out.variance = var_diag + var_off;
  if (out.variance <= 1e-12 * (1.0 + scale)) out.variance = 0.0;
  return out;
}

enum class ZeltermanMoments {
  permutation,  // Monte Carlo relabeling (default)
  exact,        // closed-form conditional moments
};

inline ZeltermanMoments parse_zelterman_moments(const std::string& s) {
  if (s == "permutation") return ZeltermanMoments::permutation;
  if (s == "exact") return ZeltermanMoments::exact;
  throw ConfigError("unknown zelterman moment mode '" + s + "'");
}

inline constexpr int kDefaultPermutations = 2000;
inline constexpr int kMinPermutations = 200;

/// Z = (D_Z^2 - mean) / sd with the mean and sd taken over relabelings of the
/// pooled units; one-sided upper p-value.
inline TestOutcome zelterman_test(const TwoSampleCounts& ts, double alpha,
                                  int n_permutations = kDefaultPermutations,
                                  std::uint64_t seed = 0,
                                  ZeltermanMoments mode = ZeltermanMoments::permutation) {
  const double raw = zelterman_statistic(ts);
  double mean = 0.0, sd = 0.0;
  if (mode == ZeltermanMoments::permutation) {
    if (n_permutations < kMinPermutations) {
      throw DomainError("zelterman_test needs at least " + std::to_string(kMinPermutations) +
                        " permutations");
    }
    const auto values = zelterman_permutation_values(ts, n_permutations, seed);
    double sum = 0.0;
    for (double v : values) sum += v;
    mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    bool all_same = true;
    for (double v : values) {
      ss += (v - mean) * (v - mean);
      all_same = all_same && v == values.front();
    }
    if (all_same) throw DegeneratePermutation("every relabeling gives the same statistic");
    sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  } else {
    const auto m = zelterman_conditional_moments(ts);
    if (!(m.variance > 0.0)) throw DegeneratePermutation("relabeling variance is zero");
    mean = m.mean;
    sd = std::sqrt(m.variance);
  }
  TestOutcome out;
  out.method = Method::zelterman;
  out.alpha = alpha;
  out.statistic = (raw - mean) / sd;
  out.p_value = std_normal_sf(out.statistic);
  out.reject = out.p_value < alpha;
  out.diagnostics = {{"D2_Z", raw}, {"null_mean", mean}, {"null_sd", sd}};
  if (mode == ZeltermanMoments::permutation) {
    out.diagnostics["n_permutations"] = static_cast<double>(n_permutations);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bai-Saranadasa mean-vector test on the implicit one-hot samples
// ---------------------------------------------------------------------------

struct BaiSaranadasaParts {
  double mean_diff_sq = 0.0;  // ||phat1 - phat2||^2
  double tr_S = 0.0;
  double tr_S2 = 0.0;
  double M = 0.0;             // mean_diff_sq - tau tr S
  double B_sq = 0.0;
  double statistic = 0.0;
};

namespace detail {

// tr(A_c A_d) / (n_c n_d) with A_c = n_c (diag(p_c) - p_c p_c^T).
inline double scaled_trace_product(std::span<const double> pc, std::span<const double> pd) {
  double dot = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const double x = pc[i] * pd[i];
    dot += x;
    s1 += x * pd[i];
    s2 += x * pc[i];
  }
  return dot - s1 - s2 + dot * dot;
}

}  // namespace detail

/// Trace quantities from count sufficient statistics; no k x k matrix is formed.
/// Standardization follows Bai and Saranadasa (1996):
///   M = ||xbar1 - xbar2||^2 - tau tr S,  tau = (n1+n2)/(n1 n2),  n = n1+n2-2,
///   B^2 = n^2/((n+2)(n-1)) (tr S^2 - (tr S)^2/n),
///   Z = M / (tau sqrt(2(n+1)/n) B).
inline BaiSaranadasaParts bai_saranadasa_parts(const TwoSampleCounts& ts) {
  const double n1 = static_cast<double>(ts.n1()), n2 = static_cast<double>(ts.n2());
  if (n1 + n2 < 4.0) throw DomainError("Bai-Saranadasa needs n1 + n2 >= 4");
  std::vector<double> p1(ts.k()), p2(ts.k());
  double sq1 = 0.0, sq2 = 0.0;
  BaiSaranadasaParts r;
  for (std::size_t i = 0; i < ts.k(); ++i) {
    p1[i] = static_cast<double>(ts.group1()[i]) / n1;
    p2[i] = static_cast<double>(ts.group2()[i]) / n2;
    sq1 += p1[i] * p1[i];
    sq2 += p2[i] * p2[i];
    const double d = p1[i] - p2[i];
    r.mean_diff_sq += d * d;
  }
  const double n = n1 + n2 - 2.0;
  const double tau = (n1 + n2) / (n1 * n2);
  r.tr_S = (n1 * (1.0 - sq1) + n2 * (1.0 - sq2)) / n;
  const double t11 = n1 * n1 * detail::scaled_trace_product(p1, p1);
  const double t22 = n2 * n2 * detail::scaled_trace_product(p2, p2);
  const double t12 = n1 * n2 * detail::scaled_trace_product(p1, p2);
  r.tr_S2 = (t11 + 2.0 * t12 + t22) / (n * n);
  r.M = r.mean_diff_sq - tau * r.tr_S;
  r.B_sq = n * n / ((n + 2.0) * (n - 1.0)) * (r.tr_S2 - r.tr_S * r.tr_S / n);
  if (r.B_sq > 0.0) {
    r.statistic = r.M / (tau * std::sqrt(2.0 * (n + 1.0) / n) * std::sqrt(r.B_sq));
  } else {
    // Zero within-group scatter: the sign of M is all that is left.
    r.B_sq = 0.0;
    r.statistic = r.M > 0.0 ? std::numeric_limits<double>::infinity()
                  : r.M < 0.0 ? -std::numeric_limits<double>::infinity()
                              : 0.0;
  }
  return r;
}

inline TestOutcome bai_saranadasa_test(const TwoSampleCounts& ts, double alpha) {
  const auto parts = bai_saranadasa_parts(ts);
  TestOutcome out;
  out.method = Method::bs;
  out.alpha = alpha;
  out.statistic = parts.statistic;
  out.p_value = std_normal_sf(parts.statistic);
  out.reject = out.p_value < alpha;
  out.diagnostics = {{"mean_diff_sq", parts.mean_diff_sq}, {"tr_S", parts.tr_S},
                     {"tr_S2", parts.tr_S2}, {"M", parts.M}, {"B_sq", parts.B_sq}};
  return out;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

struct TestOptions {
  double alpha = 0.05;
  int permutations = kDefaultPermutations;
  std::uint64_t seed = 0;
  CellRule cell_rule = CellRule::expected_positive;
  ZeltermanMoments zelterman_moments = ZeltermanMoments::permutation;
};

inline TestOutcome run_method(const TwoSampleCounts& ts, Method m, const TestOptions& opt) {
  switch (m) {
    case Method::proposed: return proposed_test(ts, opt.alpha).outcome;
    case Method::chi2: return pearson_chi2(ts, opt.alpha, opt.cell_rule);
    case Method::zelterman:
      return zelterman_test(ts, opt.alpha, opt.permutations, opt.seed, opt.zelterman_moments);
    case Method::bs: return bai_saranadasa_test(ts, opt.alpha);
  }
  throw ConfigError("unknown method");
}

}  // namespace mntest
