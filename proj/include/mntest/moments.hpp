#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "mntest/counts.hpp"
#include "mntest/errors.hpp"

namespace mntest {

/// n (n-1) ... (n-a+1); 1 for a = 0 and 0 once a > n. Overflows silently
/// past 2^64, which no supported query comes near.
inline std::uint64_t falling_factorial(std::uint64_t n, std::uint64_t a) {
  if (a > n) return 0;
  std::uint64_t r = 1;
  for (std::uint64_t j = 0; j < a; ++j) r *= (n - j);
  return r;
}

// A mixed moment E[prod N_i^e_i] over at most two distinct cells with total
// degree <= 4. Supported shapes: {i:1} {i:2} {i:3} {i:4} {i:1,j:1} {i:2,j:1}
// {i:2,j:2}.
struct MomentQuery {
  std::vector<std::pair<std::size_t, int>> powers;  // (cell index, exponent)

  static MomentQuery single(std::size_t i, int e) { return {{{i, e}}}; }
  static MomentQuery pair(std::size_t i, int ei, std::size_t j, int ej) {
    return {{{i, ei}, {j, ej}}};
  }
};

/// Exact multinomial moment for one of the seven supported shapes, written in
/// factorial moments E[N_i^(a) N_j^(b)] = n^(a+b) p_i^a p_j^b:
///   E N_i        = n p_i
///   E N_i N_j    = n^(2) p_i p_j
///   E N_i^2      = n^(2) p_i^2 + n p_i
///   E N_i^2 N_j  = n^(3) p_i^2 p_j + n^(2) p_i p_j
///   E N_i^3      = n^(3) p_i^3 + 3 n^(2) p_i^2 + n p_i
///   E N_i^2 N_j^2 = n^(4) p_i^2 p_j^2 + n^(3) (p_i^2 p_j + p_i p_j^2) + n^(2) p_i p_j
///   E N_i^4      = n^(4) p_i^4 + 6 n^(3) p_i^3 + 7 n^(2) p_i^2 + n p_i
inline double multinomial_moment(const ProbabilityVector& p, Count n, const MomentQuery& q) {
  if (n <= 0) throw DomainError("multinomial_moment: n must be positive");
  const auto& pw = q.powers;
  if (pw.empty() || pw.size() > 2) {
    throw UnsupportedQuery("moment query must involve one or two cells");
  }
  int degree = 0;
  for (const auto& [idx, e] : pw) {
    if (idx >= p.k()) throw IndexError("moment query index out of range");
    if (e <= 0) throw UnsupportedQuery("moment exponents must be positive");
    degree += e;
  }
  if (degree > 4) throw UnsupportedQuery("moment query degree exceeds 4");
  const auto nf = [n](int a) {
    return static_cast<double>(falling_factorial(static_cast<std::uint64_t>(n),
                                                 static_cast<std::uint64_t>(a)));
  };

  if (pw.size() == 1) {
    const double pi = p[pw[0].first];
    switch (pw[0].second) {
      case 1: return nf(1) * pi;
      case 2: return nf(2) * pi * pi + nf(1) * pi;
      case 3: return nf(3) * pi * pi * pi + 3.0 * nf(2) * pi * pi + nf(1) * pi;
      case 4:
        return nf(4) * pi * pi * pi * pi + 6.0 * nf(3) * pi * pi * pi + 7.0 * nf(2) * pi * pi +
               nf(1) * pi;
    }
  }
  if (pw[0].first == pw[1].first) throw UnsupportedQuery("two-cell queries need distinct cells");
  // order so the larger exponent comes first
  auto [i, ei] = pw[0];
  auto [j, ej] = pw[1];
  if (ej > ei) {
    std::swap(i, j);
    std::swap(ei, ej);
  }
  const double pi = p[i], pj = p[j];
  if (ei == 1 && ej == 1) return nf(2) * pi * pj;
  if (ei == 2 && ej == 1) return nf(3) * pi * pi * pj + nf(2) * pi * pj;
  if (ei == 2 && ej == 2) {
    return nf(4) * pi * pi * pj * pj + nf(3) * (pi * pi * pj + pi * pj * pj) + nf(2) * pi * pj;
  }
  throw UnsupportedQuery("unsupported moment shape");
}

struct MultinomialOutcome {
  std::vector<Count> counts;
  double probability = 0.0;
};

inline constexpr double kMaxEnumeratedOutcomes = 1e6;

/// C(n + k - 1, k - 1) as a double (exact well past the enumeration cap).
inline double composition_count(Count n, std::size_t k) {
  double c = 1.0;
  for (std::size_t j = 1; j < k; ++j) {
    c = c * static_cast<double>(n + static_cast<Count>(j)) / static_cast<double>(j);
    if (c > 1e18) return c;
  }
  return c;
}

/// Every outcome of Multinomial(n, p) with its exact probability
/// n!/prod(N_i!) prod p_i^N_i. Throws TooLarge above 10^6 outcomes.
inline std::vector<MultinomialOutcome> enumerate_multinomial(const ProbabilityVector& p, Count n) {
  if (n <= 0) throw DomainError("enumerate_multinomial: n must be positive");
  const std::size_t k = p.k();
  if (composition_count(n, k) > kMaxEnumeratedOutcomes) {
    throw TooLarge("outcome space exceeds the enumeration cap of 1e6");
  }
  std::vector<MultinomialOutcome> out;
  std::vector<Count> cur(k, 0);
  // probability built incrementally: at cell i, C(remaining, x) p_i^x
  std::function<void(std::size_t, Count, double)> rec = [&](std::size_t i, Count remaining,
                                                             double weight) {
    if (i + 1 == k) {
      cur[i] = remaining;
      out.push_back({cur, weight * std::pow(p[i], static_cast<double>(remaining))});
      return;
    }
    double binom = 1.0;  // C(remaining, x)
    for (Count x = 0; x <= remaining; ++x) {
      if (x > 0) binom = binom * static_cast<double>(remaining - x + 1) / static_cast<double>(x);
      cur[i] = x;
      rec(i + 1, remaining - x, weight * binom * std::pow(p[i], static_cast<double>(x)));
    }
  };
  rec(0, n, 1.0);
  return out;
}

/// E(D) under the multinomial model:
/// ||p1 - p2||^2 - ||p1||^2 / n1 - ||p2||^2 / n2.
inline double exact_expected_D(const ProbabilityVector& p1, const ProbabilityVector& p2, Count n1,
                               Count n2) {
  if (p1.k() != p2.k()) throw LengthMismatch("probability vectors differ in length");
  double xi = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < p1.k(); ++i) {
    const double d = p1[i] - p2[i];
    xi += d * d;
    s1 += p1[i] * p1[i];
    s2 += p2[i] * p2[i];
  }
  return xi - s1 / static_cast<double>(n1) - s2 / static_cast<double>(n2);
}

}  // namespace mntest
