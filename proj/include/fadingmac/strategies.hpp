// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fadingmac/errors.hpp"
#include "fadingmac/fading.hpp"
#include "fadingmac/waterfill.hpp"

namespace fadingmac {

enum class StrategyFamily {
  PlainTdma,
  Midpoint,
  AlphaMidpoint,
  VirtualSplit,
  GroupPartialCsi,
  OtdmaBenchmark,
};

struct PowerRate {
  double power = 0.0;
  double rate = 0.0;
};

/// Shared observations available to every user in one block: the block index
/// (plain TDMA's slot counter), the partial-CSI group index of every link,
/// and the active-user flags of a LOOK block. A user's rule may only read its
/// own gain plus these shared symbols.
struct BlockContext {
  std::uint64_t block_index = 0;
  std::span<const int> groups = {};
  std::span<const std::uint8_t> active = {};
};

/// A feasible power-rate strategy: per-user mapping from own power gain (plus
/// shared context) to a (power, rate) pair, with family metadata.
class Strategy {
 public:
  using EvalFn = std::function<PowerRate(int, double, const BlockContext&)>;
  using MeanFn = std::function<double(int, double)>;

  struct Parts {
    StrategyFamily family = StrategyFamily::Midpoint;
    int users = 0;
    std::vector<FadingLaw> laws;
    std::vector<double> budgets;
    std::vector<double> alpha;
    std::vector<double> thresholds;  // group-CSI strategies only
    EvalFn evaluate;
    MeanFn mean_rate;   // context-averaged rate at own gain
    MeanFn mean_power;  // context-averaged power at own gain
    double analytic_throughput = 0.0;
    std::vector<double> unused_power;  // virtual-split rounding loss per user
    std::vector<int> virtual_users;
    int active_per_block = 0;  // LOOK: harness draws this many active users
  };

  explicit Strategy(Parts parts) : p_(std::move(parts)) {
    if (p_.users < 1) throw contract_error("strategy needs at least one user");
    if (!p_.alpha.empty()) {
      double s = 0.0;
      for (double a : p_.alpha) {
        if (!(a >= 0.0)) throw contract_error("alpha entries must be nonnegative");
        s += a;
      }
      if (std::abs(s - 1.0) > 1e-12) throw contract_error("alpha must sum to 1");
    }
  }

  PowerRate evaluate(int user, double gain, const BlockContext& ctx) const {
    return p_.evaluate(user, gain, ctx);
  }
  double mean_rate(int user, double gain) const { return p_.mean_rate(user, gain); }
  double mean_power(int user, double gain) const { return p_.mean_power(user, gain); }

  StrategyFamily family() const { return p_.family; }
  int users() const { return p_.users; }
  const std::vector<FadingLaw>& laws() const { return p_.laws; }
  const std::vector<double>& budgets() const { return p_.budgets; }
  const std::vector<double>& alpha() const { return p_.alpha; }
  const std::vector<double>& thresholds() const { return p_.thresholds; }
  bool uses_groups() const { return !p_.thresholds.empty(); }
  double analytic_throughput() const { return p_.analytic_throughput; }
  const std::vector<double>& unused_power() const { return p_.unused_power; }
  const std::vector<int>& virtual_users() const { return p_.virtual_users; }
  int active_per_block() const { return p_.active_per_block; }

 private:
  Parts p_;
};

namespace detail {

inline Strategy zero_strategy(StrategyFamily family, std::vector<FadingLaw> laws,
                              std::vector<double> budgets) {
  Strategy::Parts parts;
  parts.family = family;
  parts.users = static_cast<int>(laws.size());
  parts.laws = std::move(laws);
  parts.budgets = std::move(budgets);
  parts.evaluate = [](int, double, const BlockContext&) { return PowerRate{}; };
  parts.mean_rate = [](int, double) { return 0.0; };
  parts.mean_power = [](int, double) { return 0.0; };
  return Strategy(std::move(parts));
}

}  // namespace detail

/// Midpoint strategy: every user pretends the others mirror it and picks the
/// maximal equal-rate point of the imagined symmetric MAC. The power rule is
/// the 1/L share of the pooled water-fill (equivalently, a water-fill against
/// the effective gain L*g at budget P_avg), which makes the analytic
/// throughput exactly C1(law, L * P_avg).
inline Strategy midpoint_strategy(int users, const FadingLaw& law, double p_avg,
                                  int grid = kDefaultGrid) {
  if (users < 1) throw contract_error("midpoint strategy needs users >= 1");
  std::vector<FadingLaw> laws(static_cast<std::size_t>(users), law);
  std::vector<double> budgets(static_cast<std::size_t>(users), p_avg);
  if (p_avg == 0.0)
    return detail::zero_strategy(StrategyFamily::Midpoint, std::move(laws), std::move(budgets));

  const WaterfillSolution wf = solve_level(law, users * p_avg, grid);
  const double lambda = *wf.level;
  const double inv_users = 1.0 / users;

  Strategy::Parts parts;
  parts.family = StrategyFamily::Midpoint;
  parts.users = users;
  parts.laws = std::move(laws);
  parts.budgets = std::move(budgets);
  parts.alpha.assign(static_cast<std::size_t>(users), inv_users);
  parts.analytic_throughput = wf.capacity;
  parts.evaluate = [wf, lambda, inv_users](int, double g, const BlockContext&) {
    if (g <= lambda) return PowerRate{};
    return PowerRate{wf.power(g) * inv_users, inv_users * 0.5 * std::log2(g / lambda)};
  };
  parts.mean_rate = [lambda, inv_users](int, double g) {
    return g > lambda ? inv_users * 0.5 * std::log2(g / lambda) : 0.0;
  };
  parts.mean_power = [wf, inv_users](int, double g) { return wf.power(g) * inv_users; };
  return Strategy(std::move(parts));
}

/// Alpha-midpoint strategy with alpha_i = P_i^avg / sum_j P_j^avg. Each user
/// water-fills its own law at the pooled budget and scales power by alpha_i;
/// the rate alpha_i/2 * log2(1 + g P_i(g)/alpha_i) is outage-free for
/// arbitrary laws by concavity of the log.
inline Strategy alpha_midpoint_strategy(std::vector<FadingLaw> laws,
                                        std::vector<double> budgets,
                                        int grid = kDefaultGrid) {
  if (laws.empty() || laws.size() != budgets.size())
    throw contract_error("alpha-midpoint needs matching law/budget vectors");
  double total = 0.0;
  for (double b : budgets) {
    if (!(b >= 0.0)) throw contract_error("budgets must be nonnegative");
    total += b;
  }
  if (total == 0.0)
    return detail::zero_strategy(StrategyFamily::AlphaMidpoint, std::move(laws),
                                 std::move(budgets));

  const std::size_t L = laws.size();
  std::vector<double> alpha(L);
  std::vector<double> lambda(L, 0.0);
  std::vector<WaterfillSolution> wf(L);
  double analytic = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    alpha[i] = budgets[i] / total;
    if (alpha[i] > 0.0) {
      wf[i] = solve_level(laws[i], total, grid);
      lambda[i] = *wf[i].level;
      analytic += alpha[i] * wf[i].capacity;
    }
  }

  Strategy::Parts parts;
  parts.family = StrategyFamily::AlphaMidpoint;
  parts.users = static_cast<int>(L);
  parts.laws = std::move(laws);
  parts.budgets = std::move(budgets);
  parts.alpha = alpha;
  parts.analytic_throughput = analytic;
  auto rate_at = [alpha, lambda](int u, double g) {
    const auto i = static_cast<std::size_t>(u);
    if (alpha[i] <= 0.0 || g <= lambda[i]) return 0.0;
    return alpha[i] * 0.5 * std::log2(g / lambda[i]);
  };
  auto power_at = [alpha, wf](int u, double g) {
    const auto i = static_cast<std::size_t>(u);
    return alpha[i] > 0.0 ? alpha[i] * wf[i].power(g) : 0.0;
  };
  parts.evaluate = [rate_at, power_at](int u, double g, const BlockContext&) {
    return PowerRate{power_at(u, g), rate_at(u, g)};
  };
  parts.mean_rate = rate_at;
  parts.mean_power = power_at;
  return Strategy(std::move(parts));
}

/// Plain TDMA with a shared slot counter: user (block mod L) transmits the
/// whole block at the pooled water-fill power L * P_i(g). The per-user average
/// rate matches the midpoint strategy exactly.
inline Strategy plain_tdma_strategy(int users, const FadingLaw& law, double p_avg,
                                    int grid = kDefaultGrid) {
  if (users < 1) throw contract_error("plain TDMA needs users >= 1");
  std::vector<FadingLaw> laws(static_cast<std::size_t>(users), law);
  std::vector<double> budgets(static_cast<std::size_t>(users), p_avg);
  if (p_avg == 0.0)
    return detail::zero_strategy(StrategyFamily::PlainTdma, std::move(laws), std::move(budgets));

  const WaterfillSolution wf = solve_level(law, users * p_avg, grid);
  const double lambda = *wf.level;
  const double inv_users = 1.0 / users;

  Strategy::Parts parts;
  parts.family = StrategyFamily::PlainTdma;
  parts.users = users;
  parts.laws = std::move(laws);
  parts.budgets = std::move(budgets);
  parts.analytic_throughput = wf.capacity;
  parts.evaluate = [wf, lambda, users](int u, double g, const BlockContext& ctx) {
    if (ctx.block_index % static_cast<std::uint64_t>(users) != static_cast<std::uint64_t>(u) ||
        g <= lambda)
      return PowerRate{};
    return PowerRate{wf.power(g), 0.5 * std::log2(g / lambda)};
  };
  parts.mean_rate = [lambda, inv_users](int, double g) {
    return g > lambda ? inv_users * 0.5 * std::log2(g / lambda) : 0.0;
  };
  parts.mean_power = [wf, inv_users](int, double g) { return wf.power(g) * inv_users; };
  return Strategy(std::move(parts));
}

/// Rate splitting across users with unequal budgets: user k becomes
/// N_k = floor(P_k / P_v) virtual users of budget P_v each, and the
/// L' = sum N_k virtual users run the midpoint strategy. Budget remainders
/// are dropped and flagged in unused_power().
inline Strategy virtual_split_strategy(std::vector<FadingLaw> laws,
                                       std::vector<double> budgets, double p_v,
                                       int grid = kDefaultGrid) {
  if (!(p_v > 0.0)) throw contract_error("virtual user budget P_v must be positive");
  if (laws.empty() || laws.size() != budgets.size())
    throw contract_error("virtual split needs matching law/budget vectors");

  const std::size_t L = laws.size();
  std::vector<int> n_virtual(L);
  std::vector<double> unused(L);
  long total_virtual = 0;
  for (std::size_t i = 0; i < L; ++i) {
    n_virtual[i] = static_cast<int>(std::floor(budgets[i] / p_v + 1e-9));
    if (n_virtual[i] < 1)
      throw infeasible_error("user " + std::to_string(i) + " budget below P_v; split infeasible");
    unused[i] = budgets[i] - n_virtual[i] * p_v;
    total_virtual += n_virtual[i];
  }

  const double pooled = static_cast<double>(total_virtual) * p_v;
  std::vector<double> alpha(L);
  std::vector<double> lambda(L);
  std::vector<WaterfillSolution> wf(L);
  double analytic = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    alpha[i] = static_cast<double>(n_virtual[i]) / static_cast<double>(total_virtual);
    wf[i] = solve_level(laws[i], pooled, grid);
    lambda[i] = *wf[i].level;
    analytic += alpha[i] * wf[i].capacity;
  }

  Strategy::Parts parts;
  parts.family = StrategyFamily::VirtualSplit;
  parts.users = static_cast<int>(L);
  parts.laws = std::move(laws);
  parts.budgets = std::move(budgets);
  parts.alpha = alpha;
  parts.analytic_throughput = analytic;
  parts.unused_power = std::move(unused);
  parts.virtual_users = std::move(n_virtual);
  auto rate_at = [alpha, lambda](int u, double g) {
    const auto i = static_cast<std::size_t>(u);
    return g > lambda[i] ? alpha[i] * 0.5 * std::log2(g / lambda[i]) : 0.0;
  };
  auto power_at = [alpha, wf](int u, double g) {
    return alpha[static_cast<std::size_t>(u)] * wf[static_cast<std::size_t>(u)].power(g);
  };
  parts.evaluate = [rate_at, power_at](int u, double g, const BlockContext&) {
    return PowerRate{power_at(u, g), rate_at(u, g)};
  };
  parts.mean_rate = rate_at;
  parts.mean_power = power_at;
  return Strategy(std::move(parts));
}

/// Full-CSI opportunistic-TDMA benchmark: only the block-wise best of L users
/// transmits, so the value is the single-user capacity of the max-order law
/// at the total budget. Uses the exact x^(1/L) quantile transform.
inline double otdma_benchmark(const FadingLaw& law, int users, double p_sum,
                              int grid = kDefaultGrid) {
  if (users < 1) throw contract_error("otdma benchmark needs users >= 1");
  return c1(law.max_of(users), p_sum, grid);
}

/// Average throughput sum_i E[R_i(G_i)] on the quantile grid.
inline double throughput(const Strategy& strategy, std::span<const FadingLaw> laws,
                         int grid = kDefaultGrid) {
  if (static_cast<int>(laws.size()) != strategy.users())
    throw contract_error("throughput: law count must match strategy users");
  double total = 0.0;
  for (int u = 0; u < strategy.users(); ++u) {
    double acc = 0.0;
    for (const GainNode& n : laws[static_cast<std::size_t>(u)].nodes(grid))
      acc += n.weight * strategy.mean_rate(u, n.gain);
    total += acc;
  }
  return total;
}

inline double throughput(const Strategy& strategy, int grid = kDefaultGrid) {
  return throughput(strategy, strategy.laws(), grid);
}

}  // namespace fadingmac
