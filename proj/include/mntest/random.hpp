#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mntest/counts.hpp"

namespace mntest {

using Engine = std::mt19937_64;

// Stream tags keep streams derived from the same (seed, index) apart when
// one replicate needs several independent sources.
enum class StreamTag : std::uint32_t {
  replicate = 1,
  permutation = 2,
  corpus = 3,
  generic = 4,
};

/// Deterministic engine for (seed, index, tag). The state depends only on
/// these values, never on scheduling, so replicate r draws the same numbers
/// whichever worker thread runs it.
inline Engine derive_stream(std::uint64_t seed, std::uint64_t index,
                            StreamTag tag = StreamTag::replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(tag)};
  return Engine(seq);
}

/// Multinomial(n, p) by sequential conditional binomials: cell i receives
/// Binomial(remaining n, p_i / remaining mass). Exact, O(k).
template <class URBG>
CountVector sample_multinomial(std::span<const double> p, Count n, URBG& rng) {
  std::vector<Count> out(p.size(), 0);
  Count remaining = n;
  double mass = 1.0;
  // The final positive cell absorbs whatever is left, which also absorbs
  // rounding in the running mass.
  std::size_t last = p.size();
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] > 0.0) {
      last = i;
      break;
    }
  }
  for (std::size_t i = 0; i < p.size() && remaining > 0; ++i) {
    if (p[i] <= 0.0) continue;
    if (i == last) {
      out[i] = remaining;
      remaining = 0;
      break;
    }
    const double prob = std::min(1.0, p[i] / mass);
    std::binomial_distribution<Count> draw(remaining, prob);
    const Count x = draw(rng);
    out[i] = x;
    remaining -= x;
    mass -= p[i];
    if (mass <= 0.0) mass = 0.0;
  }
  if (remaining > 0) out[last == p.size() ? 0 : last] += remaining;
  return CountVector(std::move(out));
}

template <class URBG>
CountVector sample_multinomial(const ProbabilityVector& p, Count n, URBG& rng) {
  return sample_multinomial(p.probs(), n, rng);
}

/// Given column totals, draw the group-1 share of each column when `take`
/// of the sum(totals) units are assigned to group 1 uniformly at random
/// (multivariate hypergeometric). Uses selection sampling over the units.
template <class URBG>
void sample_column_split(std::span<const Count> totals, Count take, URBG& rng,
                         std::vector<Count>& out) {
  out.assign(totals.size(), 0);
  Count pool = 0;
  for (Count t : totals) pool += t;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Count need = take;
  for (std::size_t i = 0; i < totals.size() && need > 0; ++i) {
    const Count t = totals[i];
    if (t == 0) continue;
    if (need == pool) {
      // every remaining unit is taken
      out[i] = t;
      need -= t;
      pool -= t;
      continue;
    }
    Count x = 0;
    for (Count u = 0; u < t && need > 0; ++u) {
      if (static_cast<double>(pool) * unif(rng) < static_cast<double>(need)) {
        ++x;
        --need;
      }
      --pool;
    }
    out[i] = x;
  }
}

}  // namespace mntest
