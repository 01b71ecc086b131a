#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mntest/counts.hpp"
#include "mntest/errors.hpp"
#include "mntest/normal.hpp"
#include "mntest/statistics.hpp"

namespace mntest {

// Neighborhood (indifference) test on the signal-to-noise ratio
// ||P1 - P2||^2 / sigma_k. The null H0,delta says the ratio is at most delta;
// its asymptotic p-value is Phi_bar(T - delta).

inline double p_delta_from_T(double T, double delta) {
  if (!(delta >= 0.0)) throw DomainError("delta must be nonnegative");
  return std_normal_sf(T - delta);
}

/// Smallest delta >= 0 with p_delta >= alpha: max(0, T - z_{1-alpha}).
inline double delta_star_from_T(double T, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  double d = T - std_normal_upper_quantile(alpha);
  if (d <= 0.0) return 0.0;
  // Rounding can leave p_delta a few ulps under alpha; nudge up so the
  // returned delta really satisfies p_delta >= alpha.
  for (int i = 0; i < 64 && std_normal_sf(T - d) < alpha; ++i) {
    d = std::nextafter(d, std::numeric_limits<double>::infinity());
  }
  return d;
}

inline double p_delta(const TwoSampleCounts& ts, double delta) {
  return p_delta_from_T(proposed_T(ts), delta);
}

inline double delta_star(const TwoSampleCounts& ts, double alpha) {
  return delta_star_from_T(proposed_T(ts), alpha);
}

struct NeighborhoodCurve {
  double T = 0.0;
  std::vector<double> deltas;
  std::vector<double> p_values;
  double delta_star = 0.0;
  double alpha = 0.05;
};

/// Evenly spaced grid {0, step, 2 step, ...} up to delta_max. Points are
/// j * step, not accumulated sums, so the grid does not drift.
inline std::vector<double> delta_grid(double delta_max, double step) {
  if (!(delta_max > 0.0) || !(step > 0.0)) {
    throw DomainError("delta grid needs delta_max > 0 and step > 0");
  }
  const auto n = static_cast<std::size_t>(std::floor(delta_max / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t j = 0; j < n; ++j) grid[j] = static_cast<double>(j) * step;
  return grid;
}

inline NeighborhoodCurve neighborhood_curve_from_T(double T, std::vector<double> deltas,
                                                   double alpha) {
  NeighborhoodCurve c;
  c.T = T;
  c.alpha = alpha;
  c.delta_star = delta_star_from_T(T, alpha);
  c.p_values.reserve(deltas.size());
  for (double d : deltas) c.p_values.push_back(p_delta_from_T(T, d));
  c.deltas = std::move(deltas);
  return c;
}

inline constexpr double kDefaultCurveStep = 0.01;
inline constexpr double kDefaultCurveMargin = 4.0;

/// Default right end of the curve grid: T + 4, kept at least one step wide.
inline double default_delta_max(double T, double step = kDefaultCurveStep) {
  return std::max(T + kDefaultCurveMargin, step);
}

inline NeighborhoodCurve neighborhood_curve(const TwoSampleCounts& ts, double delta_max,
                                            double step, double alpha) {
  return neighborhood_curve_from_T(proposed_T(ts), delta_grid(delta_max, step), alpha);
}

}  // namespace mntest
