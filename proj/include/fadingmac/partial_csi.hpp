// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fadingmac/errors.hpp"
#include "fadingmac/fading.hpp"
#include "fadingmac/strategies.hpp"
#include "fadingmac/waterfill.hpp"

namespace fadingmac {

/// Symmetric threshold CSI: n-1 increasing power-gain thresholds carry
/// log2(n) bits about each link. One threshold is the Good/Bad bit.
struct ThresholdCsi {
  std::vector<double> thresholds;

  static ThresholdCsi from_gains(std::vector<double> gains) {
    ThresholdCsi csi{std::move(gains)};
    double prev = 0.0;
    for (double t : csi.thresholds) {
      if (!(t > prev)) throw contract_error("thresholds must be positive and increasing");
      prev = t;
    }
    return csi;
  }

  /// The median is the natural default; quantiles make that easy.
  static ThresholdCsi from_quantiles(const FadingLaw& law, std::vector<double> quantiles) {
    std::vector<double> gains;
    gains.reserve(quantiles.size());
    for (double q : quantiles) gains.push_back(law.quantile(q));
    return from_gains(std::move(gains));
  }

  /// Group index of a realized gain: count of thresholds at or below it
  /// (a link at the threshold reports Good).
  int group_of(double gain) const {
    int m = 0;
    for (double t : thresholds)
      if (gain >= t) ++m;
    return m;
  }

  double mu_bad(const FadingLaw& law) const {
    if (thresholds.empty()) throw contract_error("mu_bad needs at least one threshold");
    return law.mass_below(thresholds.front());
  }
  double mu_good(const FadingLaw& law) const { return 1.0 - mu_bad(law); }
};

/// zeta = sum_{m=1}^{L-1} C(L-1,m) muB^m muG^(L-1-m) m/(L-m): the Good-side
/// reweighting coefficient of the one-bit transformed law.
inline double zeta(int users, double mu_bad) {
  if (users < 2) throw contract_error("zeta is defined for L >= 2");
  if (!(mu_bad >= 0.0 && mu_bad <= 1.0)) throw contract_error("mu_bad must lie in [0,1]");
  const double mu_good = 1.0 - mu_bad;
  double sum = 0.0;
  double binom = 1.0;  // C(L-1, m), updated multiplicatively
  for (int m = 1; m <= users - 1; ++m) {
    binom = binom * (users - m) / m;
    sum += binom * std::pow(mu_bad, m) * std::pow(mu_good, users - 1 - m) *
           (static_cast<double>(m) / (users - m));
  }
  return sum;
}

/// One-bit transformed law: dPsi' = dPsi (muB^(L-1) on B, (1+zeta) on G).
/// Degenerate thresholds (muB in {0,1}, including g_T = 0) leave the law
/// unchanged.
inline FadingLaw psi_prime(const FadingLaw& law, double g_threshold, int users) {
  if (users < 2) throw contract_error("psi_prime is defined for L >= 2");
  if (!(g_threshold >= 0.0)) throw contract_error("threshold must be nonnegative");
  return law.reweighted_by_brackets({g_threshold}, users);
}

/// C_PSI = C1(Psi', L P^avg): adaptive sum-capacity with one extra bit of
/// threshold CSI per other link.
inline double c_psi(const FadingLaw& law, double g_threshold, int users, double p_avg,
                    int grid = kDefaultGrid) {
  return c1(psi_prime(law, g_threshold, users), users * p_avg, grid);
}

/// Group strategy for symmetric multi-bit threshold CSI: in every block the
/// users of the highest nonempty group transmit at their K-user midpoint
/// rates (K = group size) with power P'(g)/K, everyone else stays silent.
/// P' is the water-fill of the bracket-reweighted law at the pooled budget,
/// which meets each per-user budget exactly; for one threshold this is the
/// explicit allocation achieving the one-bit capacity. With no thresholds the strategy
/// degenerates to the plain midpoint strategy.
inline Strategy group_strategy(const FadingLaw& law, const std::vector<double>& thresholds,
                               int users, double p_avg, int grid = kDefaultGrid) {
  if (users < 1) throw contract_error("group strategy needs users >= 1");
  if (thresholds.empty()) return midpoint_strategy(users, law, p_avg, grid);
  const ThresholdCsi csi = ThresholdCsi::from_gains(thresholds);

  const FadingLaw reweighted = law.reweighted_by_brackets(thresholds, users);
  const WaterfillSolution wf = solve_level(reweighted, users * p_avg, grid);
  const double lambda = *wf.level;

  // Per-bracket average activity weight: a user whose gain falls in a bracket
  // of base mass p_m is in the top group with tie-share expectation
  // (q_m^L - q_{m-1}^L) / (L p_m); empty brackets never occur.
  std::vector<double> bounds = {0.0};
  for (double t : thresholds) bounds.push_back(law.mass_below(t));
  bounds.push_back(1.0);
  std::vector<double> weight(bounds.size() - 1, 0.0);
  for (std::size_t m = 0; m + 1 < bounds.size(); ++m) {
    const double p_m = bounds[m + 1] - bounds[m];
    if (p_m > 0.0)
      weight[m] = (std::pow(bounds[m + 1], users) - std::pow(bounds[m], users)) / p_m;
  }
  auto bracket_weight = [csi, weight](double g) {
    return weight[static_cast<std::size_t>(csi.group_of(g))];
  };

  Strategy::Parts parts;
  parts.family = StrategyFamily::GroupPartialCsi;
  parts.users = users;
  parts.laws.assign(static_cast<std::size_t>(users), law);
  parts.budgets.assign(static_cast<std::size_t>(users), p_avg);
  parts.thresholds = csi.thresholds;
  parts.analytic_throughput = wf.capacity;
  parts.evaluate = [wf, lambda](int u, double g, const BlockContext& ctx) {
    if (ctx.groups.empty()) throw contract_error("group strategy needs group context");
    int top = 0, count = 0;
    for (int gidx : ctx.groups) top = std::max(top, gidx);
    for (int gidx : ctx.groups) count += (gidx == top);
    if (ctx.groups[static_cast<std::size_t>(u)] != top || g <= lambda) return PowerRate{};
    return PowerRate{wf.power(g) / count, 0.5 / count * std::log2(g / lambda)};
  };
  parts.mean_rate = [bracket_weight, lambda, users](int, double g) {
    if (g <= lambda) return 0.0;
    return bracket_weight(g) / (2.0 * users) * std::log2(g / lambda);
  };
  parts.mean_power = [bracket_weight, wf, users](int, double g) {
    return bracket_weight(g) / users * wf.power(g);
  };
  return Strategy(std::move(parts));
}

/// Consistency report for the two-user, one-bit case: the value achieved by
/// the explicit allocation, the time-sharing mixture form that upper-bounds
/// it, and C1(Psi', 2 P^avg) all coincide.
struct OneBitBounds {
  double achievable_value = 0.0;  // explicit allocation, evaluated over Psi
  double timeshare_value = 0.0;   // two-profile mixture form over Psi
  double c_psi_value = 0.0;       // C1(Psi', 2 P^avg) over the transformed law
};

inline OneBitBounds verify_one_bit_bounds(const FadingLaw& law, double g_threshold,
                                            double p_avg, int grid = kDefaultGrid) {
  const int users = 2;
  const double mu_bad = law.mass_below(g_threshold);
  const double mu_good = 1.0 - mu_bad;

  const FadingLaw prime = psi_prime(law, g_threshold, users);
  const WaterfillSolution wf = solve_level(prime, 2.0 * p_avg, grid);

  // Region integrals of log2(1 + g P'(g)) against the base law, split exactly
  // at the threshold so quadrature cells never straddle the B/G boundary.
  auto log_term = [&wf](double g) {
    return wf.level && g > *wf.level ? std::log2(g / *wf.level) : 0.0;
  };
  double int_bad = 0.0, int_good = 0.0;
  if (law.is_discrete()) {
    for (const Atom& a : law.atoms())
      (a.gain < g_threshold ? int_bad : int_good) += a.prob * log_term(a.gain);
  } else {
    if (mu_bad > 0.0) {
      double acc = 0.0;
      for (int j = 0; j < grid; ++j) acc += log_term(law.quantile(mu_bad * (j + 0.5) / grid));
      int_bad = mu_bad * acc / grid;
    }
    if (mu_good > 0.0) {
      double acc = 0.0;
      for (int j = 0; j < grid; ++j)
        acc += log_term(law.quantile(mu_bad + mu_good * (j + 0.5) / grid));
      int_good = mu_good * acc / grid;
    }
  }

  OneBitBounds report;
  report.c_psi_value = wf.capacity;
  // achievable route: both-bad and both-good blocks run midpoint on P'/2
  // each; in mixed blocks only the good user is active at full P'.
  report.achievable_value =
      0.5 * mu_bad * int_bad + 0.5 * mu_good * int_good + mu_bad * int_good;
  // mixture route: two power profiles time-shared with fractions
  // muG/(1+muB) and 2 muB/(1+muB).
  const double hat_fraction = mu_good / (1.0 + mu_bad);
  const double tilde_fraction = 2.0 * mu_bad / (1.0 + mu_bad);
  report.timeshare_value = 0.5 * mu_bad * int_bad +
                             0.5 * (1.0 + mu_bad) * hat_fraction * int_good +
                             0.5 * (1.0 + mu_bad) * tilde_fraction * int_good;
  return report;
}

}  // namespace fadingmac
