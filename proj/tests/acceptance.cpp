// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fadingmac/fadingmac.hpp"
#include "oracles.hpp"

using namespace fadingmac;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  (%s)\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// 1. Alpha-midpoint tightness: throughput equals C1(law, sum of budgets)
//    analytically (1e-6) and in a 1e6-block Monte Carlo run (3 s.e.), < 60 s.
void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  bool pass = true;
  std::string detail;
  for (int users : {2, 3}) {
    std::vector<FadingLaw> laws(static_cast<std::size_t>(users), law);
    std::vector<double> budgets;
    for (int i = 1; i <= users; ++i) budgets.push_back(i);
    double total = 0.0;
    for (double b : budgets) total += b;

    const Strategy s = alpha_midpoint_strategy(laws, budgets);
    const double target = c1(law, total);
    const double analytic_gap = std::abs(throughput(s) - target);
    pass = pass && analytic_gap <= 1e-6;

    const SimReport mc = simulate(s, 1000000, 2024, 2);
    const double mc_gap = std::abs(mc.throughput_mean - target);
    pass = pass && mc_gap <= 3.0 * mc.throughput_stderr;
    bool power_ok = true;
    for (std::size_t u = 0; u < budgets.size(); ++u)
      power_ok = power_ok && std::abs(mc.avg_power[u] - budgets[u]) <= 3.0 * mc.power_stderr[u];
    pass = pass && power_ok;
    detail += "L=" + std::to_string(users) + " analytic_gap=" + fmt(analytic_gap) +
              " mc_gap=" + fmt(mc_gap) + "/" + fmt(3.0 * mc.throughput_stderr) +
              (power_ok ? " power_ok" : " power_BAD") + "  ";
  }
  const double dt = seconds_since(t0);
  pass = pass && dt < 60.0;
  report(1, pass, detail + "runtime=" + fmt(dt) + "s");
}

// 2. Outage-freeness of every constructed strategy over 1e5 blocks plus 1e4
//    random greedy rate-splitting schedules, < 120 s total.
void criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  bool pass = true;
  std::string detail;

  const std::vector<std::pair<std::string, Strategy>> strategies = {
      {"midpoint", midpoint_strategy(2, law, 1.0)},
      {"alpha", alpha_midpoint_strategy({law, law}, {1.0, 2.0})},
      {"vsplit", virtual_split_strategy({law, law}, {1.0, 2.0}, 1.0)},
      {"group", group_strategy(law, {1.0}, 2, 1.0)},
      {"look", make_look_strategy({8, 2, law, 1.0})},
  };
  for (const auto& [name, strategy] : strategies) {
    const OutageReport r = verify_outage_free(strategy, 100000, 31, 2);
    pass = pass && r.count == 0;
    detail += name + "=" + std::to_string(r.count) + " ";
  }

  std::uint64_t infeasible = 0, ctr = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int users = 1 + static_cast<int>(4.999 * rng::uniform(404, trial, ctr++));
    std::vector<Layering> lays;
    for (int k = 0; k < users; ++k) {
      const double gamma = std::pow(10.0, -2.0 + 4.0 * rng::uniform(404, trial, ctr++));
      const int n_layers = 1 + static_cast<int>(63.999 * rng::uniform(404, trial, ctr++));
      lays.push_back(build_layering(gamma, users, n_layers, k));
    }
    if (!greedy_schedule(lays).all_feasible) ++infeasible;
  }
  pass = pass && infeasible == 0;
  const double dt = seconds_since(t0);
  pass = pass && dt < 120.0;
  report(2, pass,
         detail + "schedule_violations=" + std::to_string(infeasible) + " runtime=" + fmt(dt) + "s");
}

// 3. Water-filling oracle equivalence and the two-state closed form.
void criterion3() {
  bool pass = true;
  std::string detail;
  const std::vector<std::pair<std::vector<double>, std::vector<double>>> laws = {
      {{1.0, 4.0}, {0.5, 0.5}},
      {{0.5, 2.0, 6.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}},
      {{0.2, 1.0, 3.0, 10.0}, {0.1, 0.4, 0.3, 0.2}},
      {{1.0, 1.5}, {0.7, 0.3}},
  };
  double worst = 0.0;
  for (const auto& [gains, probs] : laws) {
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < gains.size(); ++i) atoms.push_back({gains[i], probs[i]});
    const double budget = 1.0;
    const double lib = c1(FadingLaw::discrete(atoms), budget);
    const double oracle = oracles::c1_bruteforce(gains, probs, budget).capacity;
    worst = std::max(worst, std::abs(lib - oracle));
  }
  pass = pass && worst <= 1e-6;
  detail += "bruteforce_worst=" + fmt(worst);

  const WaterfillSolution wf = solve_level(FadingLaw::discrete({{1.0, 0.5}, {4.0, 0.5}}), 1.0);
  const double closed_form = 0.25 * std::log2(1.625) + 0.25 * std::log2(6.5);
  const double lambda_err = std::abs(1.0 / *wf.level - 1.625);
  const double cap_err = std::abs(wf.capacity - closed_form);
  pass = pass && lambda_err <= 1e-9 && cap_err <= 1e-9;
  report(3, pass,
         detail + " lambda_err=" + fmt(lambda_err) + " cap_err=" + fmt(cap_err) + " C1=" +
             fmt(closed_form));
}

// 4. Rate-splitting convergence: the N_v = 1 fraction, the N_v = 1e4 floor,
//    and a stable C/N_v decay constant across gamma.
void criterion4() {
  bool pass = true;
  std::string detail;
  const std::vector<double> gammas = {1.0, 1.0};
  const auto first = fraction_sweep(gammas, 2, std::vector<int>{1, 10000});
  const double frac1_err = std::abs(first[0].fraction - 0.7382);
  pass = pass && frac1_err <= 1e-4;
  pass = pass && first[1].fraction >= 0.999;
  detail += "frac(1)_err=" + fmt(frac1_err) + " frac(1e4)=" + fmt(first[1].fraction);

  for (double gamma : {0.1, 1.0, 10.0}) {
    const std::vector<double> gg = {gamma, gamma};
    std::vector<int> layer_list;
    for (int n = 16; n <= 1024; n *= 2) layer_list.push_back(n);
    const auto rows = fraction_sweep(gg, 2, layer_list);
    double c_min = 1e300, c_max = 0.0;
    bool feasible = true;
    for (const FractionRow& r : rows) {
      feasible = feasible && r.schedule_feasible;
      const double c_hat = r.n_layers * (r.midpoint_sum - r.sum_rate);
      c_min = std::min(c_min, c_hat);
      c_max = std::max(c_max, c_hat);
    }
    const bool stable = feasible && c_max <= 1.5 * c_min;
    pass = pass && stable;
    detail += " C(g=" + fmt(gamma) + ")=" + fmt(c_max);
  }
  report(4, pass, detail);
}

// 5. Partial-CSI sandwich, one-bit three-way agreement, normalization.
void criterion5() {
  bool pass = true;
  std::string detail;
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  double min_lower_gap = 1e300, min_upper_gap = 1e300;
  for (double p : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    const double base = c1(law, 2.0 * p);
    const double with_bit = c_psi(law, 1.0, 2, p);
    const double full = otdma_benchmark(law, 2, 2.0 * p);
    min_lower_gap = std::min(min_lower_gap, with_bit - base);
    min_upper_gap = std::min(min_upper_gap, full - with_bit);
  }
  pass = pass && min_lower_gap > 1e-9 && min_upper_gap > 1e-9;
  detail += "sandwich_gaps=" + fmt(min_lower_gap) + "/" + fmt(min_upper_gap);

  double worst_three_way = 0.0;
  for (double p : {0.5, 1.0, 2.0, 5.0}) {
    const OneBitBounds r = verify_one_bit_bounds(law, 1.0, p);
    worst_three_way = std::max(worst_three_way, std::abs(r.achievable_value - r.c_psi_value));
    worst_three_way = std::max(worst_three_way, std::abs(r.timeshare_value - r.c_psi_value));
  }
  pass = pass && worst_three_way <= 1e-6;
  detail += " one_bit_worst=" + fmt(worst_three_way);

  double worst_mass = 0.0;
  const FadingLaw disc = law.quantize(1000);
  for (int users = 2; users <= 6; ++users) {
    for (double mu : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double g_t = law.quantile(mu);
      const FadingLaw disc_prime = psi_prime(disc, g_t, users);
      double total = 0.0;
      for (const Atom& a : disc_prime.atoms()) total += a.prob;
      worst_mass = std::max(worst_mass, std::abs(total - 1.0));
      worst_mass = std::max(worst_mass, std::abs(psi_prime(law, g_t, users).cdf(1e12) - 1.0));
    }
  }
  pass = pass && worst_mass <= 1e-12;
  report(5, pass, detail + " norm_worst=" + fmt(worst_mass));
}

// 6. Non-identical bounds on the scaled-exponential instance.
void criterion6() {
  bool pass = true;
  std::string detail;
  const FadingLaw base = FadingLaw::rayleigh(1.0);
  const std::vector<FadingLaw> laws = {base, base.scaled(2.0)};
  const std::vector<double> scales = {1.0, 2.0};
  double worst_order = -1e300, worst_shortcut = 0.0;
  for (double total : {0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
    const std::vector<double> budgets = {total / 2, total / 2};
    const CoupledBoundSolution upper = solve_upper_bound(laws, budgets);
    const AlphaLowerBound lower = alpha_lower_bound(laws, budgets);
    worst_order = std::max(worst_order, lower.value - upper.value);
    worst_shortcut =
        std::max(worst_shortcut, std::abs(upper.value - scaled_shortcut(base, scales, budgets)));
  }
  pass = pass && worst_order <= 1e-6 && worst_shortcut <= 1e-5;
  detail += "max(lower-upper)=" + fmt(worst_order) + " shortcut_gap=" + fmt(worst_shortcut);

  const std::vector<FadingLaw> same = {base, base};
  const std::vector<double> unit = {1.0, 1.0};
  const double ident_gap =
      std::abs(solve_upper_bound(same, unit).value - alpha_lower_bound(same, unit).value);
  pass = pass && ident_gap <= 1e-5;
  report(6, pass, detail + " identical_gap=" + fmt(ident_gap));
}

// 7. Figure 2 dominance: full-CSI O-TDMA above the midpoint strategy with a
//    nonnegative, bounded gap over a 20-point power grid.
void criterion7() {
  bool pass = true;
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  double min_gap = 1e300, max_gap = 0.0;
  std::vector<double> gaps;
  for (int i = 0; i < 20; ++i) {
    const double total = 0.2 * std::pow(1000.0, i / 19.0);
    const double mid = midpoint_strategy(2, law, total / 2).analytic_throughput();
    const double bench = otdma_benchmark(law, 2, total);
    gaps.push_back(bench - mid);
    min_gap = std::min(min_gap, bench - mid);
    max_gap = std::max(max_gap, bench - mid);
  }
  pass = pass && min_gap >= -1e-9;
  pass = pass && max_gap <= 0.6;  // saturates near half a bit for L = 2
  double tail_spread = 0.0;
  for (std::size_t i = 15; i < gaps.size(); ++i)
    tail_spread = std::max(tail_spread, std::abs(gaps[i] - gaps[15]));
  pass = pass && tail_spread <= 0.1;
  report(7, pass,
         "min_gap=" + fmt(min_gap) + " max_gap=" + fmt(max_gap) + " tail_spread=" +
             fmt(tail_spread));
}

// 8. LOOK consistency: exact K = L reduction and a clean Monte Carlo run.
void criterion8() {
  bool pass = true;
  std::string detail;
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  double reduction_err = 0.0;
  for (int users : {2, 3}) {
    reduction_err = std::max(
        reduction_err, std::abs(look_capacity({users, users, law, 1.0}) -
                                c1(law, static_cast<double>(users))));
  }
  pass = pass && reduction_err <= 1e-9;
  detail += "reduction_err=" + fmt(reduction_err);

  const LookConfig cfg{8, 2, law, 1.0};
  const Strategy s = make_look_strategy(cfg);
  const SimReport r = simulate(s, 100000, 77, 2);
  const double mc_gap = std::abs(r.throughput_mean - look_capacity(cfg));
  pass = pass && mc_gap <= 3.0 * r.throughput_stderr;
  pass = pass && r.outage_count == 0;
  bool power_ok = true;
  for (std::size_t u = 0; u < 8; ++u)
    power_ok = power_ok && r.avg_power[u] <= 1.0 + 3.0 * r.power_stderr[u];
  pass = pass && power_ok;
  report(8, pass,
         detail + " mc_gap=" + fmt(mc_gap) + "/" + fmt(3.0 * r.throughput_stderr) + " outages=" +
             std::to_string(r.outage_count) + " power_ok=" + (power_ok ? "yes" : "no"));
}

// 9. Determinism: the same seed with different worker counts is bit-identical.
void criterion9() {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  const Strategy s = alpha_midpoint_strategy({law, law}, {1.0, 2.0});
  const SimReport a = simulate(s, 200000, 123, 1);
  const SimReport b = simulate(s, 200000, 123, 2);
  const SimReport c = simulate(s, 200000, 123, 7);
  auto identical = [](const SimReport& x, const SimReport& y) {
    return x.blocks == y.blocks && x.throughput_mean == y.throughput_mean &&
           x.throughput_stderr == y.throughput_stderr && x.outage_count == y.outage_count &&
           x.avg_power == y.avg_power && x.power_stderr == y.power_stderr &&
           x.first_outage_block == y.first_outage_block;
  };
  const bool pass = identical(a, b) && identical(a, c);
  report(9, pass, pass ? "reports bit-identical for workers 1, 2, 7" : "reports differ");
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  std::printf("%d/9 criteria passed (total %.1f s)\n", 9 - g_failures, seconds_since(t0));
  return g_failures;
}
