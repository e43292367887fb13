// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <thread>
#include <vector>

#include "fadingmac/errors.hpp"
#include "fadingmac/fading.hpp"
#include "fadingmac/mac.hpp"
#include "fadingmac/rng.hpp"
#include "fadingmac/strategies.hpp"

namespace fadingmac {

inline constexpr std::uint64_t kNoOutage = std::numeric_limits<std::uint64_t>::max();

/// Monte Carlo estimate of a strategy's throughput plus the empirical side of
/// the feasibility and outage-freeness definitions.
struct SimReport {
  std::uint64_t blocks = 0;
  std::uint64_t seed = 0;
  double throughput_mean = 0.0;
  double throughput_stderr = 0.0;
  std::uint64_t outage_count = 0;
  std::vector<double> avg_power;
  std::vector<double> power_stderr;
  std::uint64_t first_outage_block = kNoOutage;
  std::vector<double> first_outage_gains;
  std::vector<double> first_outage_powers;
  std::vector<double> first_outage_rates;
};

namespace detail {

// Allocation-free membership test, 1e-9 slack as in in_region().
inline bool region_ok(std::span<const double> rates, std::span<const double> gains,
                      std::span<const double> powers, double noise) {
  const std::size_t L = rates.size();
  const std::uint32_t full = (1u << L) - 1u;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    double rate_sum = 0.0, rx = 0.0;
    for (std::uint32_t bits = mask; bits;) {
      const int i = std::countr_zero(bits);
      bits &= bits - 1;
      rate_sum += rates[static_cast<std::size_t>(i)];
      rx += gains[static_cast<std::size_t>(i)] * powers[static_cast<std::size_t>(i)];
    }
    if (rate_sum > 0.5 * std::log2(1.0 + rx / noise) + kRegionSlack) return false;
  }
  return true;
}

// Fixed-size work unit: results depend only on (seed, block range), so any
// assignment of chunks to workers reproduces the same merged report.
inline constexpr std::uint64_t kChunkBlocks = 4096;

struct ChunkAccum {
  double rate_sum = 0.0;
  double rate_sq = 0.0;
  std::vector<double> power_sum;
  std::vector<double> power_sq;
  std::uint64_t outages = 0;
  std::uint64_t first_outage_block = kNoOutage;
  std::vector<double> outage_gains, outage_powers, outage_rates;
};

// Stream ids: 0..L-1 carry per-user gain draws, the rest auxiliary draws.
inline constexpr std::uint64_t kAuxStreamBase = 1u << 20;

}  // namespace detail

/// Simulate n_blocks independent fading blocks under the strategy. Sampling
/// is counter-based on (seed, block index), work is chunked, and partial sums
/// merge in chunk order, so reports are bit-identical for any worker count.
inline SimReport simulate(const Strategy& strategy, std::span<const FadingLaw> laws,
                          std::uint64_t n_blocks, std::uint64_t seed, int workers = 1) {
  const std::size_t L = static_cast<std::size_t>(strategy.users());
  if (n_blocks == 0) throw contract_error("simulate needs at least one block");
  if (laws.size() != L) throw contract_error("simulate: law count must match strategy users");
  if (workers < 1) throw contract_error("simulate needs workers >= 1");
  if (L > kMaxRegionUsers) throw contract_error("simulate: outage checks support L <= 20");

  const std::uint64_t n_chunks = (n_blocks + detail::kChunkBlocks - 1) / detail::kChunkBlocks;
  std::vector<detail::ChunkAccum> chunks(n_chunks);

  const int active_count = strategy.active_per_block();
  const bool uses_groups = strategy.uses_groups();
  const std::vector<double>& thresholds = strategy.thresholds();

  auto run_chunk = [&](std::uint64_t c) {
    detail::ChunkAccum& acc = chunks[c];
    acc.power_sum.assign(L, 0.0);
    acc.power_sq.assign(L, 0.0);
    std::vector<double> gains(L), powers(L), rates(L);
    std::vector<int> groups(uses_groups ? L : 0);
    std::vector<std::uint8_t> active(active_count > 0 ? L : 0);
    std::vector<int> order(active_count > 0 ? L : 0);

    const std::uint64_t begin = c * detail::kChunkBlocks;
    const std::uint64_t end = std::min(n_blocks, begin + detail::kChunkBlocks);
    for (std::uint64_t b = begin; b < end; ++b) {
      const BlockRng rng(seed, b);
      for (std::size_t i = 0; i < L; ++i) gains[i] = laws[i].quantile(rng.uniform(i));

      BlockContext ctx;
      ctx.block_index = b;
      if (uses_groups) {
        for (std::size_t i = 0; i < L; ++i) {
          int m = 0;
          for (double t : thresholds)
            if (gains[i] >= t) ++m;
          groups[i] = m;
        }
        ctx.groups = groups;
      }
      if (active_count > 0) {
        // uniform L-subset by partial Fisher-Yates on the aux streams
        for (std::size_t i = 0; i < L; ++i) order[i] = static_cast<int>(i);
        for (int t = 0; t < active_count; ++t) {
          const double u = rng.uniform(detail::kAuxStreamBase + static_cast<std::uint64_t>(t));
          const int j = t + static_cast<int>(u * static_cast<double>(static_cast<int>(L) - t));
          std::swap(order[static_cast<std::size_t>(t)], order[static_cast<std::size_t>(j)]);
        }
        std::fill(active.begin(), active.end(), std::uint8_t{0});
        for (int t = 0; t < active_count; ++t) active[static_cast<std::size_t>(order[t])] = 1;
        ctx.active = active;
      }

      double block_rate = 0.0;
      for (std::size_t i = 0; i < L; ++i) {
        const PowerRate pr = strategy.evaluate(static_cast<int>(i), gains[i], ctx);
        powers[i] = pr.power;
        rates[i] = pr.rate;
        block_rate += pr.rate;
        acc.power_sum[i] += pr.power;
        acc.power_sq[i] += pr.power * pr.power;
      }
      acc.rate_sum += block_rate;
      acc.rate_sq += block_rate * block_rate;
      if (!detail::region_ok(rates, gains, powers, 1.0)) {
        ++acc.outages;
        if (acc.first_outage_block == kNoOutage) {
          acc.first_outage_block = b;
          acc.outage_gains = gains;
          acc.outage_powers = powers;
          acc.outage_rates = rates;
        }
      }
    }
  };

  const int n_workers = static_cast<int>(std::min<std::uint64_t>(
      static_cast<std::uint64_t>(workers), n_chunks));
  if (n_workers <= 1) {
    for (std::uint64_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w)
      pool.emplace_back([&]() {
        for (std::uint64_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1))
          run_chunk(c);
      });
    for (std::thread& t : pool) t.join();
  }

  SimReport report;
  report.blocks = n_blocks;
  report.seed = seed;
  report.avg_power.assign(L, 0.0);
  report.power_stderr.assign(L, 0.0);
  double rate_sum = 0.0, rate_sq = 0.0;
  std::vector<double> power_sum(L, 0.0), power_sq(L, 0.0);
  for (const detail::ChunkAccum& acc : chunks) {
    rate_sum += acc.rate_sum;
    rate_sq += acc.rate_sq;
    for (std::size_t i = 0; i < L; ++i) {
      power_sum[i] += acc.power_sum[i];
      power_sq[i] += acc.power_sq[i];
    }
    report.outage_count += acc.outages;
    if (report.first_outage_block == kNoOutage && acc.first_outage_block != kNoOutage) {
      report.first_outage_block = acc.first_outage_block;
      report.first_outage_gains = acc.outage_gains;
      report.first_outage_powers = acc.outage_powers;
      report.first_outage_rates = acc.outage_rates;
    }
  }

  const double n = static_cast<double>(n_blocks);
  report.throughput_mean = rate_sum / n;
  if (n_blocks > 1) {
    const double var = std::max(0.0, (rate_sq - rate_sum * rate_sum / n) / (n - 1.0));
    report.throughput_stderr = std::sqrt(var / n);
  }
  for (std::size_t i = 0; i < L; ++i) {
    report.avg_power[i] = power_sum[i] / n;
    if (n_blocks > 1) {
      const double var =
          std::max(0.0, (power_sq[i] - power_sum[i] * power_sum[i] / n) / (n - 1.0));
      report.power_stderr[i] = std::sqrt(var / n);
    }
  }
  return report;
}

inline SimReport simulate(const Strategy& strategy, std::uint64_t n_blocks,
                          std::uint64_t seed, int workers = 1) {
  return simulate(strategy, strategy.laws(), n_blocks, seed, workers);
}

/// Outage-freeness check: violation count with the first offending block's
/// full state kept for debugging.
struct OutageReport {
  std::uint64_t count = 0;
  std::uint64_t first_block = kNoOutage;
  std::vector<double> gains, powers, rates;
};

inline OutageReport verify_outage_free(const Strategy& strategy,
                                       std::span<const FadingLaw> laws,
                                       std::uint64_t n_blocks, std::uint64_t seed,
                                       int workers = 1) {
  const SimReport r = simulate(strategy, laws, n_blocks, seed, workers);
  return {r.outage_count, r.first_outage_block, r.first_outage_gains, r.first_outage_powers,
          r.first_outage_rates};
}

inline OutageReport verify_outage_free(const Strategy& strategy, std::uint64_t n_blocks,
                                       std::uint64_t seed, int workers = 1) {
  return verify_outage_free(strategy, strategy.laws(), n_blocks, seed, workers);
}

}  // namespace fadingmac
