// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fadingmac/errors.hpp"

namespace fadingmac {

/// One realized block of the L-user Gaussian MAC.
struct MacState {
  std::vector<double> gains;   // power gains g_i = |h_i|^2
  std::vector<double> powers;  // transmit powers P_i
  double noise_power = 1.0;

  MacState(std::vector<double> g, std::vector<double> p, double noise = 1.0)
      : gains(std::move(g)), powers(std::move(p)), noise_power(noise) {
    if (gains.empty() || gains.size() != powers.size())
      throw contract_error("MacState needs matching nonempty gain/power vectors");
    if (!(noise_power > 0.0)) throw contract_error("noise power must be positive");
    for (double v : gains)
      if (!(v >= 0.0)) throw contract_error("gains must be nonnegative");
    for (double v : powers)
      if (!(v >= 0.0)) throw contract_error("powers must be nonnegative");
  }

  std::size_t users() const { return gains.size(); }
};

inline constexpr std::size_t kMaxRegionUsers = 20;
inline constexpr double kRegionSlack = 1e-9;

/// Sum-rate bound of the realized MAC, full user set.
inline double sum_rate_bound(const MacState& state) {
  double rx = 0.0;
  for (std::size_t i = 0; i < state.users(); ++i)
    rx += state.gains[i] * state.powers[i];
  return 0.5 * std::log2(1.0 + rx / state.noise_power);
}

/// Capacity-region membership: every nonempty subset S must satisfy
/// sum_{i in S} R_i <= 1/2 log2(1 + sum_{i in S} g_i P_i / N), with a 1e-9
/// slack since optimal strategies meet symmetric constraints with equality.
inline bool in_region(std::span<const double> rates, const MacState& state) {
  const std::size_t L = state.users();
  if (rates.size() != L) throw contract_error("rate tuple length must match MacState");
  if (L > kMaxRegionUsers)
    throw contract_error("in_region enumerates subsets exactly; L > 20 unsupported");
  for (double r : rates)
    if (!(r >= 0.0)) throw contract_error("rates must be nonnegative");

  const std::uint32_t full = (1u << L) - 1u;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    double rate_sum = 0.0, rx = 0.0;
    for (std::uint32_t bits = mask; bits;) {
      const int i = std::countr_zero(bits);
      bits &= bits - 1;
      rate_sum += rates[static_cast<std::size_t>(i)];
      rx += state.gains[static_cast<std::size_t>(i)] * state.powers[static_cast<std::size_t>(i)];
    }
    const double bound = 0.5 * std::log2(1.0 + rx / state.noise_power);
    if (rate_sum > bound + kRegionSlack) return false;
  }
  return true;
}

}  // namespace fadingmac
