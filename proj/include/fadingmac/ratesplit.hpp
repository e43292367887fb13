// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fadingmac/errors.hpp"

namespace fadingmac {

/// Feasibility slack for schedule steps; designed and actual interference tie
/// exactly for identical users, so strict comparison would flip on round-off.
inline constexpr double kScheduleSlack = 1e-12;

/// One user's rate-splitting stack: layer l = 1 is the bottom layer, decoded
/// last. Layer rates treat the same and lower layers of every user as
/// interference; noise is normalized to 1.
struct Layering {
  int user = 0;
  int users = 0;  // L assumed when the rates were designed
  double received_power = 0.0;
  std::vector<double> layer_powers;
  std::vector<double> layer_rates;
  std::vector<double> prefix;  // prefix[l] = sum of layers 1..l; prefix[0] = 0

  int layer_count() const { return static_cast<int>(layer_powers.size()); }

  /// Interference budget the rate of layer l (1-based) was designed against:
  /// 1 + (L-1) gamma^l + L sum_{j<l} gamma^j.
  double designed_interference(int layer) const {
    return 1.0 + (users - 1) * prefix[static_cast<std::size_t>(layer)] +
           prefix[static_cast<std::size_t>(layer - 1)];
  }
};

/// Split a received power gamma into n equal layers with rates
/// r^l = 1/2 log2(1 + gamma^l / (1 + (L-1) gamma^l + L sum_{j<l} gamma^j)).
inline Layering build_layering(double gamma, int users, int n_layers, int user_index = 0) {
  if (!(gamma > 0.0)) throw contract_error("received power must be positive");
  if (n_layers < 1) throw contract_error("layer count must be >= 1");
  if (users < 1) throw contract_error("user count must be >= 1");

  Layering out;
  out.user = user_index;
  out.users = users;
  out.received_power = gamma;
  out.prefix.resize(static_cast<std::size_t>(n_layers) + 1);
  out.layer_powers.resize(static_cast<std::size_t>(n_layers));
  out.layer_rates.resize(static_cast<std::size_t>(n_layers));
  out.prefix[0] = 0.0;
  for (int l = 1; l <= n_layers; ++l) {
    // prefix telescopes exactly to gamma at the top layer
    out.prefix[static_cast<std::size_t>(l)] =
        l == n_layers ? gamma : gamma * (static_cast<double>(l) / n_layers);
    out.layer_powers[static_cast<std::size_t>(l - 1)] =
        out.prefix[static_cast<std::size_t>(l)] - out.prefix[static_cast<std::size_t>(l - 1)];
    const double p = out.layer_powers[static_cast<std::size_t>(l - 1)];
    out.layer_rates[static_cast<std::size_t>(l - 1)] =
        0.5 * std::log2(1.0 + p / out.designed_interference(l));
  }
  return out;
}

struct DecodeStep {
  int user = 0;
  int layer = 0;  // 1-based
  double designed_interference = 0.0;
  double actual_interference = 0.0;
  bool feasible = false;
};

struct DecodeSchedule {
  std::vector<DecodeStep> steps;
  bool all_feasible = true;
};

/// Greedy successive decoding: always decode the topmost undecoded layer of
/// the user with the largest remaining undecoded received power (ties go to
/// the lowest user index). A step is feasible when the interference actually
/// present does not exceed what the layer rate was designed against.
inline DecodeSchedule greedy_schedule(std::span<const Layering> layerings) {
  if (layerings.empty()) throw contract_error("greedy_schedule needs at least one layering");
  const int users = static_cast<int>(layerings.size());
  for (const Layering& lay : layerings)
    if (lay.users != users)
      throw contract_error("all layerings must be designed for the same user count");

  std::vector<int> top(layerings.size());
  std::size_t remaining = 0;
  for (std::size_t k = 0; k < layerings.size(); ++k) {
    top[k] = layerings[k].layer_count();
    remaining += static_cast<std::size_t>(top[k]);
  }

  DecodeSchedule schedule;
  schedule.steps.reserve(remaining);
  while (remaining > 0) {
    int pick = -1;
    double best = -1.0;
    double undecoded_total = 0.0;
    for (std::size_t k = 0; k < layerings.size(); ++k) {
      if (top[k] == 0) continue;
      const double u = layerings[k].prefix[static_cast<std::size_t>(top[k])];
      undecoded_total += u;
      if (u > best) {
        best = u;
        pick = static_cast<int>(k);
      }
    }
    const Layering& lay = layerings[static_cast<std::size_t>(pick)];
    const int layer = top[static_cast<std::size_t>(pick)];
    DecodeStep step;
    step.user = lay.user;
    step.layer = layer;
    step.designed_interference = lay.designed_interference(layer);
    step.actual_interference =
        1.0 + undecoded_total - lay.layer_powers[static_cast<std::size_t>(layer - 1)];
    step.feasible = step.actual_interference <= step.designed_interference + kScheduleSlack;
    schedule.all_feasible = schedule.all_feasible && step.feasible;
    schedule.steps.push_back(step);
    --top[static_cast<std::size_t>(pick)];
    --remaining;
  }
  return schedule;
}

struct FractionRow {
  int n_layers = 0;
  double sum_rate = 0.0;       // bits, all users' layers
  double midpoint_sum = 0.0;   // bits, sum of midpoint rates
  double fraction = 0.0;
  bool schedule_feasible = false;
};

/// Layered sum rate against the midpoint sum for a list of layer counts; the
/// fraction approaches 1 as the layers thin out.
inline std::vector<FractionRow> fraction_sweep(std::span<const double> gammas, int users,
                                               std::span<const int> layer_counts) {
  if (gammas.empty() || static_cast<int>(gammas.size()) != users)
    throw contract_error("fraction_sweep needs one received power per user");
  double midpoint_sum = 0.0;
  for (double g : gammas) {
    if (!(g > 0.0)) throw contract_error("received powers must be positive");
    midpoint_sum += 0.5 / users * std::log2(1.0 + users * g);
  }

  std::vector<FractionRow> rows;
  rows.reserve(layer_counts.size());
  for (int n_layers : layer_counts) {
    std::vector<Layering> layerings;
    layerings.reserve(gammas.size());
    for (std::size_t k = 0; k < gammas.size(); ++k)
      layerings.push_back(build_layering(gammas[k], users, n_layers, static_cast<int>(k)));
    const DecodeSchedule schedule = greedy_schedule(layerings);
    double sum_rate = 0.0;
    for (const Layering& lay : layerings)
      for (double r : lay.layer_rates) sum_rate += r;
    rows.push_back({n_layers, sum_rate, midpoint_sum, sum_rate / midpoint_sum,
                    schedule.all_feasible});
  }
  return rows;
}

}  // namespace fadingmac
