// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fadingmac/harness.hpp"
#include "fadingmac/look.hpp"
#include "fadingmac/partial_csi.hpp"
#include "fadingmac/ratesplit.hpp"
#include "fadingmac/strategies.hpp"
#include "fadingmac/waterfill.hpp"

using namespace fadingmac;

namespace {

Strategy scaled_rate_strategy(const Strategy& base, double factor) {
  Strategy::Parts parts;
  parts.family = base.family();
  parts.users = base.users();
  parts.laws = base.laws();
  parts.budgets = base.budgets();
  parts.evaluate = [base, factor](int u, double g, const BlockContext& ctx) {
    PowerRate pr = base.evaluate(u, g, ctx);
    pr.rate *= factor;
    return pr;
  };
  parts.mean_rate = [base, factor](int u, double g) { return factor * base.mean_rate(u, g); };
  parts.mean_power = [base](int u, double g) { return base.mean_power(u, g); };
  return Strategy(std::move(parts));
}

// Midpoint powers with the layered schedule's decoded sum rate instead of the
// midpoint rate; dominated by the midpoint rate, so it stays outage-free.
Strategy layered_rate_strategy(const FadingLaw& law, int users, double p_avg, int n_layers) {
  const Strategy base = midpoint_strategy(users, law, p_avg);
  Strategy::Parts parts;
  parts.family = StrategyFamily::Midpoint;
  parts.users = users;
  parts.laws = base.laws();
  parts.budgets = base.budgets();
  auto layered_rate = [base, users, n_layers](int u, double g) {
    const double power = base.mean_power(u, g);
    const double received = g * power;
    if (received <= 0.0) return 0.0;
    const Layering lay = build_layering(received, users, n_layers);
    double sum = 0.0;
    for (double r : lay.layer_rates) sum += r;
    return sum;
  };
  parts.evaluate = [base, layered_rate](int u, double g, const BlockContext&) {
    return PowerRate{base.mean_power(u, g), layered_rate(u, g)};
  };
  parts.mean_rate = layered_rate;
  parts.mean_power = [base](int u, double g) { return base.mean_power(u, g); };
  return Strategy(std::move(parts));
}

}  // namespace

TEST_CASE("simulate: zero strategy") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  const Strategy zero = alpha_midpoint_strategy({law, law}, {0.0, 0.0});
  const SimReport r = simulate(zero, 1000, 1);
  CHECK(r.throughput_mean == 0.0);
  CHECK(r.outage_count == 0);
  CHECK(r.avg_power[0] == 0.0);
}

TEST_CASE("simulate: contract checks") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  const Strategy mid = midpoint_strategy(2, law, 1.0);
  CHECK_THROWS_AS(simulate(mid, 0, 1), contract_error);
  CHECK_THROWS_AS(simulate(mid, std::vector<FadingLaw>{law}, 10, 1), contract_error);
  CHECK_THROWS_AS(simulate(mid, 10, 1, 0), contract_error);
}

TEST_CASE("simulate: midpoint matches the pooled capacity within three s.e.") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  const Strategy mid = midpoint_strategy(2, law, 1.0);
  const SimReport r = simulate(mid, 200000, 7, 2);
  CHECK(r.outage_count == 0);
  CHECK(std::abs(r.throughput_mean - c1(law, 2.0)) <= 3.0 * r.throughput_stderr);
  for (int u = 0; u < 2; ++u) {
    CHECK(r.avg_power[static_cast<std::size_t>(u)] <=
          1.0 + 3.0 * r.power_stderr[static_cast<std::size_t>(u)]);
  }
}

TEST_CASE("simulate: deterministic across worker counts") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  const Strategy s = alpha_midpoint_strategy({law, law}, {1.0, 2.0});
  const SimReport a = simulate(s, 50000, 42, 1);
  const SimReport b = simulate(s, 50000, 42, 3);
  const SimReport c = simulate(s, 50000, 42, 8);
  CHECK(a.throughput_mean == b.throughput_mean);
  CHECK(b.throughput_mean == c.throughput_mean);
  CHECK(a.throughput_stderr == c.throughput_stderr);
  CHECK(a.avg_power == c.avg_power);
  CHECK(a.power_stderr == c.power_stderr);
  CHECK(a.outage_count == c.outage_count);
  // and a different seed actually changes the draw
  CHECK(simulate(s, 50000, 43, 1).throughput_mean != a.throughput_mean);
}

TEST_CASE("verify_outage_free: optimal strategies are clean, inflated rates are not") {
  const FadingLaw two_atom = FadingLaw::discrete({{1.0, 0.5}, {4.0, 0.5}});
  const Strategy mid = midpoint_strategy(2, two_atom, 0.5);
  CHECK(verify_outage_free(mid, 20000, 3).count == 0);

  const Strategy inflated = scaled_rate_strategy(mid, 1.5);
  const OutageReport bad = verify_outage_free(inflated, 20000, 3);
  CHECK(bad.count > 0);
  CHECK(bad.first_block != kNoOutage);
  REQUIRE(bad.gains.size() == 2);
  // the recorded block really violates the region
  CHECK_FALSE(in_region(bad.rates, MacState(bad.gains, bad.powers)));
}

TEST_CASE("simulate: group strategy matches c_psi within three standard errors") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  const Strategy s = group_strategy(law, {1.0}, 2, 1.0);
  const SimReport r = simulate(s, 200000, 11, 2);
  CHECK(r.outage_count == 0);
  CHECK(std::abs(r.throughput_mean - c_psi(law, 1.0, 2, 1.0)) <= 3.0 * r.throughput_stderr);
  for (int u = 0; u < 2; ++u)
    CHECK(r.avg_power[static_cast<std::size_t>(u)] <=
          1.0 + 3.0 * r.power_stderr[static_cast<std::size_t>(u)]);
}

TEST_CASE("simulate: LOOK blocks activate exactly L users") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  const Strategy s = make_look_strategy({8, 2, law, 1.0});
  const SimReport r = simulate(s, 50000, 5, 2);
  CHECK(r.outage_count == 0);
  CHECK(std::abs(r.throughput_mean - s.analytic_throughput()) <= 3.0 * r.throughput_stderr);
  // each user is active with probability L/K = 1/4
  for (int u = 0; u < 8; ++u)
    CHECK(r.avg_power[static_cast<std::size_t>(u)] <=
          1.0 + 3.0 * r.power_stderr[static_cast<std::size_t>(u)]);
}

TEST_CASE("simulate: stderr shrinks like 1/sqrt(blocks)") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  const Strategy mid = midpoint_strategy(2, law, 1.0);
  const SimReport half = simulate(mid, 40000, 9);
  const SimReport full = simulate(mid, 80000, 9);
  const double ratio = (half.throughput_stderr * half.throughput_stderr) /
                       (2.0 * full.throughput_stderr * full.throughput_stderr);
  CHECK(ratio > 1.0 / 1.5);
  CHECK(ratio < 1.5);
}

TEST_CASE("simulate: layered rates stay outage-free and approach the midpoint") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  const Strategy mid = midpoint_strategy(2, law, 1.0);
  double prev = 0.0;
  for (int layers : {1, 4, 16, 64}) {
    const Strategy layered = layered_rate_strategy(law, 2, 1.0, layers);
    const SimReport r = simulate(layered, 20000, 21);
    CHECK(r.outage_count == 0);
    CHECK(r.throughput_mean >= prev);
    prev = r.throughput_mean;
  }
  const SimReport mid_run = simulate(mid, 20000, 21);
  CHECK(prev <= mid_run.throughput_mean + 1e-9);
  CHECK(mid_run.throughput_mean - prev < 0.02);
}

TEST_CASE("simulate: multi-bit group strategy is feasible and outage-free") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  // two thresholds = four groups = 2 bits of CSI per other link
  const std::vector<double> thresholds = {law.quantile(0.25), law.quantile(0.5),
                                          law.quantile(0.75)};
  const Strategy s = group_strategy(law, thresholds, 3, 1.0);
  const SimReport r = simulate(s, 100000, 57, 2);
  CHECK(r.outage_count == 0);
  CHECK(std::abs(r.throughput_mean - s.analytic_throughput()) <= 3.0 * r.throughput_stderr);
  for (int u = 0; u < 3; ++u)
    CHECK(r.avg_power[static_cast<std::size_t>(u)] <=
          1.0 + 3.0 * r.power_stderr[static_cast<std::size_t>(u)]);
  // more side information can only help relative to no extra CSI
  CHECK(s.analytic_throughput() >= c1(law, 3.0) - 1e-9);
}

TEST_CASE("simulate: plain TDMA rotates one active user per block") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  const Strategy tdma = plain_tdma_strategy(3, law, 1.0);
  const SimReport r = simulate(tdma, 90000, 17, 2);
  CHECK(r.outage_count == 0);
  CHECK(std::abs(r.throughput_mean - tdma.analytic_throughput()) <= 3.0 * r.throughput_stderr);
  for (int u = 0; u < 3; ++u)
    CHECK(r.avg_power[static_cast<std::size_t>(u)] <=
          1.0 + 3.0 * r.power_stderr[static_cast<std::size_t>(u)]);
}
