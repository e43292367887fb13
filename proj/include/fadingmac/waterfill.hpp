// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "fadingmac/errors.hpp"
#include "fadingmac/fading.hpp"

namespace fadingmac {

/// Single-user water-fill of a fading law against an average power budget.
/// power(g) = (1/level - 1/g)^+ and the law-average of power() equals the
/// budget. Capacity is in bits per channel use, logs base 2 throughout.
struct WaterfillSolution {
  std::optional<double> level;  // lambda; empty when budget is zero
  double budget = 0.0;
  double capacity = 0.0;

  double power(double g) const {
    if (!level || g <= 0.0) return 0.0;
    const double p = 1.0 / *level - 1.0 / g;
    return p > 0.0 ? p : 0.0;
  }

  /// Rate of a user seeing effective received power g * power(g):
  /// 1 + g * power(g) collapses to g / lambda on the active set.
  double half_log_term(double g) const {
    if (!level || g <= *level) return 0.0;
    return 0.5 * std::log2(g / *level);
  }
};

inline double budget_at_level(const std::vector<GainNode>& nodes, double lambda) {
  double b = 0.0;
  for (const GainNode& n : nodes)
    if (n.gain > lambda) b += n.weight * (1.0 / lambda - 1.0 / n.gain);
  return b;
}

/// Solve for the water level meeting the average-power budget by bisection
/// on log(lambda), relative tolerance 1e-12.
inline WaterfillSolution solve_level(const FadingLaw& law, double p_avg,
                                     int grid = kDefaultGrid) {
  if (!(p_avg >= 0.0)) throw contract_error("average power must be nonnegative");
  if (p_avg == 0.0) return {std::nullopt, 0.0, 0.0};

  const std::vector<GainNode> nodes = law.nodes(grid);
  double g_max = 0.0, active_mass = 0.0, inv_gain_mass = 0.0;
  for (const GainNode& n : nodes) {
    if (n.gain > 0.0) {
      g_max = std::max(g_max, n.gain);
      active_mass += n.weight;
      inv_gain_mass += n.weight / n.gain;
    }
  }
  if (g_max <= 0.0)
    throw infeasible_error("law concentrated at zero gain cannot carry power");

  // B(lambda) >= active_mass/lambda - inv_gain_mass, so lo brackets from below.
  double hi = g_max;
  double lo = std::min(active_mass / (p_avg + inv_gain_mass), 0.5 * hi);
  for (int guard = 0; guard < 200 && budget_at_level(nodes, lo) < p_avg; ++guard) lo *= 0.5;

  double log_lo = std::log(lo), log_hi = std::log(hi);
  for (int it = 0; it < 200 && (log_hi - log_lo) > 1e-13; ++it) {
    const double mid = 0.5 * (log_lo + log_hi);
    (budget_at_level(nodes, std::exp(mid)) > p_avg ? log_lo : log_hi) = mid;
  }
  const double lambda = std::exp(0.5 * (log_lo + log_hi));

  double capacity = 0.0;
  for (const GainNode& n : nodes)
    if (n.gain > lambda) capacity += n.weight * 0.5 * std::log2(n.gain / lambda);
  return {lambda, p_avg, capacity};
}

/// C1(law, P_a): single-user adaptive capacity via water-filling.
inline double c1(const FadingLaw& law, double p_avg, int grid = kDefaultGrid) {
  return solve_level(law, p_avg, grid).capacity;
}

}  // namespace fadingmac
