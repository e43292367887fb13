// SPDX-License-Identifier: Apache-2.0
//
// fadingmac command-line frontend: capacity values, Monte Carlo simulation,
// and CSV-reproduction presets for the figure curves.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fadingmac/fadingmac.hpp"
#include "fadingmac/scenario.hpp"

namespace {

using namespace fadingmac;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw contract_error("cannot open output file " + path);
  out << content;
}

std::string csv_text(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

void write_outputs(const std::string& out_path, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows, const std::string& command,
                   const Scenario& sc, const std::string& note = "") {
  write_file(out_path, csv_text(header, rows));
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["version"] = kVersion;
  manifest["csv"] = out_path;
  manifest["schema"] = header;
  manifest["seed"] = sc.seed;
  manifest["grid"] = sc.grid;
  manifest["workers"] = sc.workers;
  manifest["scenario"] = serialize(sc);
  manifest["scenario_hash"] = scenario_hash(sc);
  if (!note.empty()) manifest["note"] = note;
  write_file(out_path + ".manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << out_path << " (" << rows.size() << " rows)\n";
}

Scenario load_scenario(const std::string& config_path) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw contract_error("cannot read config file " + config_path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

FadingLaw shared_law(const Scenario& sc) {
  if (sc.laws.size() != 1)
    throw contract_error("this command needs a single shared law declaration");
  FadingLaw law = sc.laws[0].build();
  return sc.noise == 1.0 ? law : law.scaled(1.0 / sc.noise);
}

std::vector<double> resolve_thresholds(const Scenario& sc, const FadingLaw& law) {
  if (!sc.thresholds.empty()) return sc.thresholds;
  if (!sc.threshold_quantiles.empty())
    return ThresholdCsi::from_quantiles(law, sc.threshold_quantiles).thresholds;
  return {};
}

void require_identical_users(const Scenario& sc) {
  if (sc.laws.size() != 1)
    throw contract_error("strategy '" + sc.strategy + "' assumes identical users; declare one shared law.*");
  for (double b : sc.budgets)
    if (b != sc.budgets[0])
      throw contract_error("strategy '" + sc.strategy + "' assumes identical users; budgets must match");
}

Strategy build_strategy(const Scenario& sc) {
  const std::vector<FadingLaw> laws = sc.build_laws();
  if (sc.strategy == "midpoint") {
    require_identical_users(sc);
    return midpoint_strategy(sc.users, laws[0], sc.budgets[0], sc.grid);
  }
  if (sc.strategy == "alpha") return alpha_midpoint_strategy(laws, sc.budgets, sc.grid);
  if (sc.strategy == "tdma") {
    require_identical_users(sc);
    return plain_tdma_strategy(sc.users, laws[0], sc.budgets[0], sc.grid);
  }
  if (sc.strategy == "vsplit") {
    if (!(sc.pv > 0.0)) throw contract_error("vsplit strategy needs pv > 0");
    return virtual_split_strategy(laws, sc.budgets, sc.pv, sc.grid);
  }
  if (sc.strategy == "group") {
    require_identical_users(sc);
    const std::vector<double> thresholds = resolve_thresholds(sc, laws[0]);
    return group_strategy(laws[0], thresholds, sc.users, sc.budgets[0], sc.grid);
  }
  if (sc.strategy == "look") {
    if (sc.look_users < 1 || sc.look_active < 1)
      throw contract_error("look strategy needs look_users and look_active");
    return make_look_strategy({sc.look_users, sc.look_active, laws[0], sc.budgets[0]}, sc.grid);
  }
  throw contract_error("unknown strategy '" + sc.strategy + "'");
}

std::vector<std::vector<std::string>> capacity_rows(const Scenario& sc,
                                                    const std::string& strategy,
                                                    const std::vector<double>& totals) {
  if (strategy != "alpha" && sc.laws.size() != 1)
    throw contract_error("capacity --strategy " + strategy + " assumes one shared law");
  const std::vector<FadingLaw> laws = sc.build_laws();
  const double base_total = sc.total_budget();
  std::vector<std::vector<std::string>> rows;
  for (const double total : totals) {
    double value = 0.0;
    if (strategy == "otdma") {
      value = otdma_benchmark(laws[0], sc.users, total, sc.grid);
    } else if (strategy == "midpoint" || strategy == "tdma") {
      const Strategy s =
          strategy == "midpoint"
              ? midpoint_strategy(sc.users, laws[0], total / sc.users, sc.grid)
              : plain_tdma_strategy(sc.users, laws[0], total / sc.users, sc.grid);
      value = s.analytic_throughput();
    } else if (strategy == "alpha") {
      std::vector<double> budgets = sc.budgets;
      for (double& b : budgets) b *= base_total > 0.0 ? total / base_total : 0.0;
      value = alpha_midpoint_strategy(laws, budgets, sc.grid).analytic_throughput();
    } else {
      throw contract_error("capacity supports strategies midpoint|alpha|tdma|otdma");
    }
    rows.push_back({strategy, std::to_string(sc.users), fmt(total), fmt(value)});
  }
  return rows;
}

int cmd_capacity(const Scenario& sc, const std::string& strategy,
                 std::vector<double> totals, const std::string& out) {
  if (totals.empty()) totals = {sc.total_budget()};
  write_outputs(out, {"strategy", "users", "P_total", "throughput_bits"},
                capacity_rows(sc, strategy, totals), "capacity", sc);
  return 0;
}

int cmd_simulate(const Scenario& sc, const std::string& out) {
  const Strategy strategy = build_strategy(sc);
  const SimReport report = simulate(strategy, sc.blocks, sc.seed, sc.workers);

  std::vector<std::string> header = {"blocks",           "seed",
                                     "workers",          "throughput_mean",
                                     "throughput_stderr", "outage_count"};
  std::vector<std::string> row = {std::to_string(report.blocks), std::to_string(report.seed),
                                  std::to_string(sc.workers),    fmt(report.throughput_mean),
                                  fmt(report.throughput_stderr), std::to_string(report.outage_count)};
  for (std::size_t i = 0; i < report.avg_power.size(); ++i) {
    header.push_back("avg_power_" + std::to_string(i + 1));
    row.push_back(fmt(report.avg_power[i]));
    header.push_back("power_stderr_" + std::to_string(i + 1));
    row.push_back(fmt(report.power_stderr[i]));
  }
  write_outputs(out, header, {row}, "simulate", sc);

  std::cout << "strategy " << sc.strategy << ": " << report.blocks << " blocks, throughput "
            << fmt(report.throughput_mean) << " +/- " << fmt(report.throughput_stderr)
            << " bits, outages " << report.outage_count << "\n";
  if (strategy.analytic_throughput() > 0.0)
    std::cout << "analytic throughput " << fmt(strategy.analytic_throughput()) << " bits\n";
  for (std::size_t i = 0; i < report.avg_power.size(); ++i)
    std::cout << "user " << i + 1 << ": avg power " << fmt(report.avg_power[i]) << " (budget "
              << fmt(strategy.budgets()[i]) << ")\n";
  return 0;
}

int cmd_ratesplit(const Scenario& sc, std::vector<double> gammas, std::vector<int> layers,
                  const std::string& out) {
  if (gammas.empty()) gammas = {1.0, 1.0};
  if (layers.empty())
    layers = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192, 10000};
  const int users = static_cast<int>(gammas.size());
  std::vector<std::vector<std::string>> rows;
  for (const FractionRow& r : fraction_sweep(gammas, users, layers)) {
    if (!r.schedule_feasible)
      throw convergence_error("greedy schedule infeasible", {static_cast<double>(r.n_layers)});
    rows.push_back({std::to_string(r.n_layers), fmt(r.sum_rate), fmt(r.midpoint_sum),
                    fmt(r.fraction)});
  }
  write_outputs(out, {"N_v", "sum_rate_bits", "midpoint_sum_bits", "fraction"}, rows,
                "ratesplit", sc);
  return 0;
}

int cmd_partial_csi(const Scenario& sc, const std::string& threshold_spec, int bits,
                    std::vector<double> powers, const std::string& out) {
  const FadingLaw law = shared_law(sc);
  if (powers.empty()) powers = {0.5, 1.0, 2.0, 5.0, 10.0};
  if (bits < 1) throw contract_error("bits must be >= 1");

  // threshold: plain number = gain, "q:<x>" = quantile of the law
  double g_threshold = 0.0;
  double quantile = 0.5;
  bool by_quantile = true;
  if (!threshold_spec.empty()) {
    if (threshold_spec.rfind("q:", 0) == 0) {
      quantile = std::stod(threshold_spec.substr(2));
    } else {
      by_quantile = false;
      g_threshold = std::stod(threshold_spec);
    }
  }
  if (by_quantile) g_threshold = law.quantile(quantile);

  std::string note;
  std::vector<std::vector<std::string>> rows;
  for (const double p : powers) {
    const double c_sum = c1(law, sc.users * p, sc.grid);
    const double full = otdma_benchmark(law, sc.users, sc.users * p, sc.grid);
    double with_csi = 0.0;
    if (bits == 1) {
      with_csi = c_psi(law, g_threshold, sc.users, p, sc.grid);
    } else {
      // multi-bit: no closed-form capacity; report the group strategy's
      // achievable throughput (equals its Monte Carlo estimate)
      const int groups = 1 << bits;
      std::vector<double> thresholds;
      for (int j = 1; j < groups; ++j)
        thresholds.push_back(law.quantile(static_cast<double>(j) / groups));
      with_csi = group_strategy(law, thresholds, sc.users, p, sc.grid).analytic_throughput();
      note = "multi-bit column c_psi is the simulated group strategy throughput, not a capacity";
    }
    rows.push_back({fmt(p), fmt(c_sum), fmt(with_csi), fmt(full)});
  }
  write_outputs(out, {"P_avg", "c_sum", "c_psi", "full_csi"}, rows, "partial-csi", sc, note);
  if (!note.empty()) std::cout << "note: " << note << "\n";
  return 0;
}

int cmd_nonident(const Scenario& sc, std::vector<double> means, std::vector<double> totals,
                 bool symmetric_construction, const std::string& out) {
  if (means.empty()) means = {1.0, 2.0};
  if (totals.empty()) totals = {0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
  std::vector<FadingLaw> laws;
  double strongest = 0.0;
  for (double m : means) {
    laws.push_back(FadingLaw::rayleigh(m));
    strongest = std::max(strongest, m);
  }
  const std::size_t L = laws.size();

  std::vector<std::string> header = {"P_total", "upper_bound", "lower_bound"};
  if (symmetric_construction) header.push_back("symmetric_lower_mean" + fmt(strongest));
  std::vector<std::vector<std::string>> rows;
  for (const double total : totals) {
    const std::vector<double> budgets(L, total / static_cast<double>(L));
    const CoupledBoundSolution upper = solve_upper_bound(laws, budgets, sc.grid);
    const AlphaLowerBound lower = alpha_lower_bound(laws, budgets, sc.grid);
    std::vector<std::string> row = {fmt(total), fmt(upper.value), fmt(lower.value)};
    if (symmetric_construction)
      row.push_back(fmt(c1(FadingLaw::rayleigh(strongest), total, sc.grid)));
    rows.push_back(std::move(row));
  }
  write_outputs(out, header, rows, "nonident", sc,
                symmetric_construction
                    ? "symmetric_lower column evaluates the strongest-law symmetric "
                      "construction; reference only, no feasibility claim"
                    : "");
  return 0;
}

int cmd_look(Scenario sc, int total_users, int active, double p_avg, const std::string& out) {
  const FadingLaw law = shared_law(sc);
  const LookConfig cfg{total_users, active, law, p_avg};
  const double analytic = look_capacity(cfg, sc.grid);
  const Strategy strategy = make_look_strategy(cfg, sc.grid);
  const SimReport report = simulate(strategy, sc.blocks, sc.seed, sc.workers);
  sc.look_users = total_users;
  sc.look_active = active;
  write_outputs(out, {"K", "L", "P_avg", "c_look", "mc_estimate", "mc_stderr"},
                {{std::to_string(total_users), std::to_string(active), fmt(p_avg), fmt(analytic),
                  fmt(report.throughput_mean), fmt(report.throughput_stderr)}},
                "look", sc);
  std::cout << "outages " << report.outage_count << "\n";
  return 0;
}

int cmd_figure(int which, Scenario sc, const std::string& out) {
  switch (which) {
    case 2: {
      sc.users = 2;
      const FadingLaw law = FadingLaw::rayleigh(1.0);
      std::vector<std::vector<std::string>> rows;
      for (int i = 0; i < 20; ++i) {
        const double total = 0.2 * std::pow(1000.0, i / 19.0);  // 0.2 .. 200
        const double mid = midpoint_strategy(2, law, total / 2, sc.grid).analytic_throughput();
        const double bench = otdma_benchmark(law, 2, total, sc.grid);
        rows.push_back({fmt(total), fmt(mid), fmt(bench)});
      }
      write_outputs(out, {"P_total", "midpoint_bits", "otdma_bits"}, rows, "figure2", sc);
      return 0;
    }
    case 3:
      sc.users = 2;
      return cmd_ratesplit(sc, {1.0, 1.0}, {}, out);
    case 4:
      sc.users = 2;
      return cmd_partial_csi(sc, "1.0", 1, {}, out);
    case 5:
      return cmd_nonident(sc, {1.0, 2.0}, {}, false, out);
    default:
      throw contract_error("figure must be one of 2, 3, 4, 5");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fadingmac: adaptive sum-capacity of block-fading Gaussian MACs"};
  app.require_subcommand(1);

  std::string config_path, out_path, strategy = "midpoint", threshold_spec;
  std::vector<double> totals, gammas, powers, means;
  std::vector<int> layers;
  int bits = 1, look_K = 8, look_L = 2, figure_id = 2;
  double look_pavg = 1.0;
  bool symmetric_construction = false;
  std::uint64_t seed = 0;
  int workers = 0, grid = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "scenario config file");
    cmd->add_option("--out", out_path, "output CSV path");
    cmd->add_option("--seed", seed, "override scenario seed");
    cmd->add_option("--workers", workers, "override scenario workers");
    cmd->add_option("--grid", grid, "override quantile grid size");
  };

  CLI::App* capacity = app.add_subcommand("capacity", "analytic throughput / benchmarks");
  add_common(capacity);
  capacity->add_option("--strategy", strategy, "midpoint|alpha|tdma|otdma");
  capacity->add_option("--sweep-total", totals, "total power sweep")->delimiter(',');

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo block simulation");
  add_common(simulate_cmd);
  simulate_cmd->add_option("--strategy", strategy, "strategy override");
  std::uint64_t blocks_override = 0;
  simulate_cmd->add_option("--blocks", blocks_override, "override scenario blocks");

  CLI::App* ratesplit_cmd = app.add_subcommand("ratesplit", "layered sum rate vs N_v");
  add_common(ratesplit_cmd);
  ratesplit_cmd->add_option("--gammas", gammas, "received powers")->delimiter(',');
  ratesplit_cmd->add_option("--layers", layers, "layer counts")->delimiter(',');

  CLI::App* pcsi = app.add_subcommand("partial-csi", "1-bit / multi-bit threshold CSI curves");
  add_common(pcsi);
  pcsi->add_option("--threshold", threshold_spec, "gain value or q:<quantile> (1-bit case)");
  pcsi->add_option("--bits", bits, "CSI bits per other link; > 1 uses quantile-spaced thresholds");
  pcsi->add_option("--powers", powers, "per-user budget sweep")->delimiter(',');

  CLI::App* nonident_cmd = app.add_subcommand("nonident", "non-identical law bounds");
  add_common(nonident_cmd);
  nonident_cmd->add_option("--means", means, "per-user Rayleigh mean power gains")->delimiter(',');
  nonident_cmd->add_option("--sweep-total", totals, "total power sweep")->delimiter(',');
  nonident_cmd->add_flag("--symmetric-construction", symmetric_construction,
                         "add the symmetric strongest-law reference curve");

  CLI::App* look_cmd = app.add_subcommand("look", "block-fading LOOK channel");
  add_common(look_cmd);
  look_cmd->add_option("--users", look_K, "total users K");
  look_cmd->add_option("--active", look_L, "active users L");
  look_cmd->add_option("--pavg", look_pavg, "per-user budget");
  look_cmd->add_option("--blocks", blocks_override, "simulation blocks");

  CLI::App* figure = app.add_subcommand("figure", "figure reproduction presets");
  add_common(figure);
  figure->add_option("id", figure_id, "figure id: 2|3|4|5")->required();

  try {
    app.parse(argc, argv);

    Scenario sc;
    if (!config_path.empty()) sc = load_scenario(config_path);
    for (CLI::App* cmd : {capacity, simulate_cmd, ratesplit_cmd, pcsi, nonident_cmd, look_cmd, figure}) {
      if (!cmd->parsed()) continue;
      auto given = [cmd](const std::string& name) {
        const CLI::Option* opt = cmd->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
      };
      if (given("--seed")) sc.seed = seed;
      if (given("--workers")) sc.workers = workers;
      if (given("--grid")) sc.grid = grid;
      if (given("--strategy")) sc.strategy = strategy;
      if (given("--blocks")) sc.blocks = blocks_override;
    }

    if (capacity->parsed()) {
      if (out_path.empty()) out_path = "capacity.csv";
      return cmd_capacity(sc, strategy, totals, out_path);
    }
    if (simulate_cmd->parsed()) {
      if (out_path.empty()) out_path = "simulate.csv";
      return cmd_simulate(sc, out_path);
    }
    if (ratesplit_cmd->parsed()) {
      if (out_path.empty()) out_path = "ratesplit.csv";
      return cmd_ratesplit(sc, gammas, layers, out_path);
    }
    if (pcsi->parsed()) {
      sc.users = std::max(sc.users, 2);
      if (out_path.empty()) out_path = "partial_csi.csv";
      return cmd_partial_csi(sc, threshold_spec, bits, powers, out_path);
    }
    if (nonident_cmd->parsed()) {
      if (out_path.empty()) out_path = "nonident.csv";
      return cmd_nonident(sc, means, totals, symmetric_construction, out_path);
    }
    if (look_cmd->parsed()) {
      if (out_path.empty()) out_path = "look.csv";
      return cmd_look(sc, look_K, look_L, look_pavg, out_path);
    }
    if (figure->parsed()) {
      if (out_path.empty()) out_path = "figure" + std::to_string(figure_id) + ".csv";
      return cmd_figure(figure_id, sc, out_path);
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const convergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
