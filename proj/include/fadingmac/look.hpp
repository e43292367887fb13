// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "fadingmac/errors.hpp"
#include "fadingmac/fading.hpp"
#include "fadingmac/strategies.hpp"
#include "fadingmac/waterfill.hpp"

namespace fadingmac {

/// Block-fading LOOK channel: K identical users, exactly L active per block,
/// individual CSI, per-user average budget P_avg.
struct LookConfig {
  int total_users = 0;   // K
  int active_users = 0;  // L
  FadingLaw law;
  double p_avg = 0.0;

  void validate() const {
    if (active_users < 1 || total_users < active_users)
      throw contract_error("LOOK needs 1 <= L <= K");
    if (!(p_avg > 0.0)) throw contract_error("LOOK budget must be positive");
  }
};

/// Analytic value: each active user banks its idle blocks, water-filling the
/// effective gain L*g at the inflated budget (K/L) P_avg, and plays its
/// L-user midpoint rate. C_LOOK = 1/2 E log2(1 + L g P(g)).
inline double look_capacity(const LookConfig& cfg, int grid = kDefaultGrid) {
  cfg.validate();
  const double inflated = static_cast<double>(cfg.total_users) / cfg.active_users * cfg.p_avg;
  return c1(cfg.law.scaled(cfg.active_users), inflated, grid);
}

/// The simulable strategy behind that value: the harness draws a uniform
/// L-subset each block; members transmit, everyone else is silent.
inline Strategy make_look_strategy(const LookConfig& cfg, int grid = kDefaultGrid) {
  cfg.validate();
  const int K = cfg.total_users;
  const int L = cfg.active_users;
  const double inflated = static_cast<double>(K) / L * cfg.p_avg;
  const WaterfillSolution wf = solve_level(cfg.law.scaled(L), inflated, grid);
  const double lambda = *wf.level;  // level in the effective-gain domain
  const double duty = static_cast<double>(L) / K;

  Strategy::Parts parts;
  parts.family = StrategyFamily::Midpoint;
  parts.users = K;
  parts.laws.assign(static_cast<std::size_t>(K), cfg.law);
  parts.budgets.assign(static_cast<std::size_t>(K), cfg.p_avg);
  parts.analytic_throughput = wf.capacity;
  parts.active_per_block = L;
  parts.evaluate = [wf, lambda, L](int u, double g, const BlockContext& ctx) {
    if (ctx.active.empty()) throw contract_error("LOOK strategy needs active-set context");
    if (!ctx.active[static_cast<std::size_t>(u)]) return PowerRate{};
    const double eff = L * g;
    if (eff <= lambda) return PowerRate{};
    return PowerRate{wf.power(eff), 0.5 / L * std::log2(eff / lambda)};
  };
  parts.mean_rate = [lambda, L, duty](int, double g) {
    const double eff = L * g;
    return eff > lambda ? duty * 0.5 / L * std::log2(eff / lambda) : 0.0;
  };
  parts.mean_power = [wf, L, duty](int, double g) { return duty * wf.power(L * g); };
  return Strategy(std::move(parts));
}

}  // namespace fadingmac
