// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "fadingmac/errors.hpp"
#include "fadingmac/fading.hpp"
#include "fadingmac/mac.hpp"
#include "fadingmac/waterfill.hpp"

namespace fadingmac {

/// Quantile-coupled upper bound after Lagrange optimization: per-user water
/// levels, per-grid-point time fractions, and the bound value in bits.
struct CoupledBoundSolution {
  std::vector<double> multipliers;          // lambda_k; +inf for silent users
  std::vector<std::vector<double>> alpha;   // [user][grid point], sums to 1 per point
  std::vector<std::vector<double>> power;   // [user][grid point] while transmitting
  std::vector<std::vector<double>> gains;   // h_k^2(x_j)
  double value = 0.0;                       // bits per channel use
  std::vector<double> budget_residuals;     // realized - target, per user
  int grid = 0;
};

/// Time-sharing fractions attaining the sum-rate bound of a fixed MAC:
/// beta_i = h_i^2 P_i / sum_k h_k^2 P_k.
struct TimeShare {
  std::vector<double> fractions;
  bool degenerate = false;  // all received powers zero; uniform fallback
};

inline TimeShare timeshare_fractions(const MacState& state) {
  const std::size_t L = state.users();
  std::vector<double> rx(L);
  double total = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    rx[i] = state.gains[i] * state.powers[i];
    total += rx[i];
  }
  if (!(total > 0.0))
    return {std::vector<double>(L, 1.0 / static_cast<double>(L)), true};
  for (double& v : rx) v /= total;
  return {std::move(rx), false};
}

/// Eq.-style coupled evaluation: 1/2 log2(1 + sum_k h_k^2(x) P_k(x)) averaged
/// over the shared quantile grid, for caller-supplied power maps.
inline double coupled_bound(std::span<const FadingLaw> laws,
                            std::span<const std::function<double(double)>> power_maps,
                            std::span<const double> budgets, int grid = kDefaultGrid) {
  const std::size_t L = laws.size();
  if (L == 0 || power_maps.size() != L || budgets.size() != L)
    throw contract_error("coupled_bound needs matching laws, power maps, budgets");
  std::vector<std::vector<double>> p(L, std::vector<double>(static_cast<std::size_t>(grid)));
  for (std::size_t k = 0; k < L; ++k) {
    double spent = 0.0;
    for (int j = 0; j < grid; ++j) {
      const double x = (j + 0.5) / grid;
      const double pw = power_maps[k](x);
      if (!(pw >= 0.0)) throw contract_error("power maps must be nonnegative");
      p[k][static_cast<std::size_t>(j)] = pw;
      spent += pw;
    }
    spent /= grid;
    if (spent > budgets[k] + 1e-9 * std::max(1.0, budgets[k]))
      throw contract_error("power map exceeds the budget of user " + std::to_string(k));
  }
  double value = 0.0;
  for (int j = 0; j < grid; ++j) {
    const double x = (j + 0.5) / grid;
    double rx = 0.0;
    for (std::size_t k = 0; k < L; ++k)
      rx += laws[k].quantile(x) * p[k][static_cast<std::size_t>(j)];
    value += 0.5 * std::log2(1.0 + rx);
  }
  return value / grid;
}

namespace detail {

// Dual of the coupled-grid power allocation in the water-level form
// P_k(x) = (1/lambda_k - 1/h_k^2(x))^+: with t_j = max_k g_kj / lambda_k,
//   D(lambda) = sum_k lambda_k P_k + (1/n) sum_j phi(t_j),
//   phi(t)    = (ln t - 1 + 1/t) for t > 1, else 0,
// convex in lambda; its minimum is the bound value (up to the 1/(2 ln 2)
// bits conversion).
inline double dual_phi(double t) {
  return t > 1.0 ? std::log(t) - 1.0 + 1.0 / t : 0.0;
}

// Partial dual along one coordinate, with the other users' contribution
// folded into per-point floors.
inline double dual_along(double lambda_k, double budget_k,
                         const std::vector<double>& own_gains,
                         const std::vector<double>& floors) {
  double acc = 0.0;
  const std::size_t n = own_gains.size();
  for (std::size_t j = 0; j < n; ++j)
    acc += dual_phi(std::max(own_gains[j] / lambda_k, floors[j]));
  return lambda_k * budget_k + acc / static_cast<double>(n);
}

inline double golden_min(const std::function<double(double)>& f, double lo, double hi,
                         int iters = 90) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iters; ++it) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Solve the L x L system A v = b by Gaussian elimination with partial pivot.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                        std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    if (std::abs(a[col][col]) < 1e-300) { b[col] = 0.0; continue; }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> v(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = std::abs(a[i][i]) < 1e-300 ? 0.0 : b[i] / a[i][i];
  return v;
}

}  // namespace detail

/// Coupled upper bound, optimized: find per-user multipliers so that at every
/// grid point power flows only to users attaining max_j h_j^2(x)/lambda_j and
/// every average-power budget is met. Multipliers come from minimizing the
/// convex dual by cyclic per-user line search; mass on tied points is split
/// and then repaired by a least-squares adjustment so budgets hold exactly.
inline CoupledBoundSolution solve_upper_bound(std::span<const FadingLaw> laws,
                                              std::span<const double> budgets,
                                              int grid = kDefaultGrid,
                                              int max_cycles = 200) {
  const std::size_t L = laws.size();
  if (L == 0 || budgets.size() != L)
    throw contract_error("solve_upper_bound needs matching laws and budgets");
  for (double b : budgets)
    if (!(b >= 0.0)) throw contract_error("budgets must be nonnegative");

  CoupledBoundSolution sol;
  sol.grid = grid;
  const std::size_t n = static_cast<std::size_t>(grid);
  sol.gains.assign(L, std::vector<double>(n));
  double gain_cap = 0.0;
  for (std::size_t k = 0; k < L; ++k) {
    double gmax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sol.gains[k][j] = laws[k].quantile((static_cast<double>(j) + 0.5) / grid);
      gmax = std::max(gmax, sol.gains[k][j]);
    }
    if (budgets[k] > 0.0 && gmax <= 0.0)
      throw infeasible_error("user " + std::to_string(k) + " has no positive-gain mass");
    gain_cap = std::max(gain_cap, gmax);
  }

  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> lambda(L, kInf);
  std::vector<std::size_t> live;
  for (std::size_t k = 0; k < L; ++k)
    if (budgets[k] > 0.0) live.push_back(k);

  sol.multipliers.assign(L, kInf);
  sol.alpha.assign(L, std::vector<double>(n, 0.0));
  sol.power.assign(L, std::vector<double>(n, 0.0));
  sol.budget_residuals.assign(L, 0.0);
  if (live.empty()) return sol;

  // Seed each live user at its own single-user water level.
  for (std::size_t k : live) {
    const WaterfillSolution wf = solve_level(laws[k], budgets[k] * static_cast<double>(live.size()), grid);
    lambda[k] = *wf.level;
  }

  std::vector<double> floors(n);
  std::vector<double> base_t(n);
  for (int cycle = 0; cycle < max_cycles; ++cycle) {
    double max_step = 0.0;
    for (std::size_t k : live) {
      for (std::size_t j = 0; j < n; ++j) {
        double m = 0.0;
        for (std::size_t i : live)
          if (i != k) m = std::max(m, sol.gains[i][j] / lambda[i]);
        floors[j] = m;
      }
      const auto& own = sol.gains[k];
      const double budget = budgets[k];
      const double lo = std::log(1e-12 * gain_cap / (1.0 + budget));
      const double hi = std::log(4.0 * gain_cap);
      const double log_new = detail::golden_min(
          [&](double ll) { return detail::dual_along(std::exp(ll), budget, own, floors); },
          lo, hi);
      max_step = std::max(max_step, std::abs(log_new - std::log(lambda[k])));
      lambda[k] = std::exp(log_new);
    }

    // Scale every multiplier jointly: coordinate moves alone stall on the
    // tie ridge (identical or proportionally scaled laws), while the ridge
    // itself is exactly the uniform log-scaling direction.
    double budget_dot = 0.0;
    for (std::size_t k : live) budget_dot += lambda[k] * budgets[k];
    for (std::size_t j = 0; j < n; ++j) {
      double t = 0.0;
      for (std::size_t k : live) t = std::max(t, sol.gains[k][j] / lambda[k]);
      base_t[j] = t;
    }
    const double shift = detail::golden_min(
        [&](double s) {
          double acc = 0.0;
          const double scale = std::exp(-s);
          for (std::size_t j = 0; j < n; ++j) acc += detail::dual_phi(base_t[j] * scale);
          return std::exp(s) * budget_dot + acc / static_cast<double>(n);
        },
        -30.0, 30.0);
    for (std::size_t k : live) lambda[k] *= std::exp(shift);
    max_step = std::max(max_step, std::abs(shift));

    if (max_step < 1e-13) break;
  }
  sol.multipliers = lambda;

  // Primal recovery: active sets with a relative tie tolerance, equal split
  // on ties, then a least-squares correction meeting every budget.
  constexpr double kTieTol = 1e-9;
  std::vector<std::vector<std::size_t>> active(n);
  for (std::size_t j = 0; j < n; ++j) {
    double t = 0.0;
    for (std::size_t k : live) t = std::max(t, sol.gains[k][j] / lambda[k]);
    if (t <= 1.0) {
      for (std::size_t k : live) sol.alpha[k][j] = 1.0 / static_cast<double>(live.size());
      continue;
    }
    for (std::size_t k : live) {
      if (sol.gains[k][j] / lambda[k] >= t * (1.0 - kTieTol)) {
        active[j].push_back(k);
        sol.power[k][j] = std::max(0.0, 1.0 / lambda[k] - 1.0 / sol.gains[k][j]);
      }
    }
    for (std::size_t k : active[j])
      sol.alpha[k][j] = 1.0 / static_cast<double>(active[j].size());
  }

  auto residuals = [&]() {
    std::vector<double> r(L, 0.0);
    for (std::size_t k = 0; k < L; ++k) {
      double spent = 0.0;
      for (std::size_t j = 0; j < n; ++j) spent += sol.alpha[k][j] * sol.power[k][j];
      r[k] = spent / static_cast<double>(n) - budgets[k];
    }
    return r;
  };

  std::vector<double> res = residuals();
  bool has_tie = false;
  for (std::size_t j = 0; j < n; ++j) has_tie = has_tie || active[j].size() > 1;
  if (has_tie) {
    // minimize sum of squared alpha corrections subject to per-point zero-sum
    // and per-user budget repair; corrections take the KKT form
    // c_kj = v_k P_kj - mean_over_ties(v_i P_ij).
    std::vector<std::vector<double>> mat(L, std::vector<double>(L, 0.0));
    std::vector<double> rhs(L, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (active[j].size() < 2) continue;
      const double inv = 1.0 / static_cast<double>(active[j].size());
      for (std::size_t k : active[j])
        for (std::size_t i : active[j])
          mat[k][i] += sol.power[k][j] * ((k == i ? 1.0 : 0.0) - inv) * sol.power[i][j];
    }
    for (std::size_t k = 0; k < L; ++k) {
      for (double& m : mat[k]) m /= static_cast<double>(n);
      rhs[k] = -res[k];
    }
    const std::vector<double> v = detail::solve_linear(mat, rhs);
    for (std::size_t j = 0; j < n; ++j) {
      if (active[j].size() < 2) continue;
      double mean = 0.0;
      for (std::size_t i : active[j]) mean += v[i] * sol.power[i][j];
      mean /= static_cast<double>(active[j].size());
      double total = 0.0;
      for (std::size_t k : active[j]) {
        sol.alpha[k][j] = std::max(0.0, sol.alpha[k][j] + v[k] * sol.power[k][j] - mean);
        total += sol.alpha[k][j];
      }
      if (total > 0.0)
        for (std::size_t k : active[j]) sol.alpha[k][j] /= total;
    }
    res = residuals();
  }

  sol.budget_residuals = res;
  for (std::size_t k = 0; k < L; ++k)
    if (std::abs(res[k]) > 1e-6 * std::max(1.0, budgets[k]))
      throw convergence_error("coupled bound multipliers did not meet budgets", res);

  double value = 0.0;
  for (std::size_t k = 0; k < L; ++k)
    for (std::size_t j = 0; j < n; ++j)
      if (sol.power[k][j] > 0.0)
        value += sol.alpha[k][j] * 0.5 * std::log2(sol.gains[k][j] / lambda[k]);
  sol.value = value / static_cast<double>(n);
  return sol;
}

/// Shortcut for laws that are a common base scaled by per-user gains: the
/// time fractions are constant, proportional to the received powers
/// s_k P_k^avg, and each user water-fills its own scaled law at budget
/// P_k^avg / alpha_k. Every term then equals C1(base, sum_k s_k P_k), which
/// is the optimized coupled bound.
inline double scaled_shortcut(const FadingLaw& base, std::span<const double> scales,
                              std::span<const double> budgets, int grid = kDefaultGrid) {
  if (scales.empty() || scales.size() != budgets.size())
    throw contract_error("scaled_shortcut needs matching scales and budgets");
  double received_total = 0.0;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    if (!(scales[k] > 0.0)) throw contract_error("scales must be positive");
    if (!(budgets[k] >= 0.0)) throw contract_error("budgets must be nonnegative");
    received_total += scales[k] * budgets[k];
  }
  if (received_total <= 0.0) return 0.0;
  double value = 0.0;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    const double alpha = scales[k] * budgets[k] / received_total;
    if (alpha <= 0.0) continue;
    value += alpha * c1(base.scaled(scales[k]), budgets[k] / alpha, grid);
  }
  return value;
}

/// Achievable lower bound: the alpha-midpoint throughput
/// sum_i alpha_i C1(law_i, P_i/alpha_i) maximized over the simplex.
/// Golden-section for two users, seeded simplex-lattice refinement above.
struct AlphaLowerBound {
  double value = 0.0;
  std::vector<double> alpha;
};

inline AlphaLowerBound alpha_lower_bound(std::span<const FadingLaw> laws,
                                         std::span<const double> budgets,
                                         int grid = kDefaultGrid) {
  const std::size_t L = laws.size();
  if (L == 0 || budgets.size() != L)
    throw contract_error("alpha_lower_bound needs matching laws and budgets");
  double total = 0.0;
  for (double b : budgets) {
    if (!(b >= 0.0)) throw contract_error("budgets must be nonnegative");
    total += b;
  }
  if (total <= 0.0) return {0.0, std::vector<double>(L, 1.0 / static_cast<double>(L))};

  auto term = [&](std::size_t k, double a) {
    if (a < 1e-12 || budgets[k] <= 0.0) return 0.0;
    return a * c1(laws[k], budgets[k] / a, grid);
  };
  auto objective = [&](const std::vector<double>& alpha) {
    double v = 0.0;
    for (std::size_t k = 0; k < L; ++k) v += term(k, alpha[k]);
    return v;
  };

  if (L == 1) return {c1(laws[0], budgets[0], grid), {1.0}};

  if (L == 2) {
    // golden-section maximization on alpha_1, tolerance 1e-7
    constexpr double kInvPhi = 0.6180339887498949;
    double a = 0.0, b = 1.0;
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    auto f = [&](double a1) { return term(0, a1) + term(1, 1.0 - a1); };
    double fc = f(c), fd = f(d);
    while (b - a > 1e-7) {
      if (fc > fd) {
        b = d; d = c; fd = fc;
        c = b - kInvPhi * (b - a);
        fc = f(c);
      } else {
        a = c; c = d; fc = fd;
        d = a + kInvPhi * (b - a);
        fd = f(d);
      }
    }
    const double a1 = 0.5 * (a + b);
    return {f(a1), {a1, 1.0 - a1}};
  }

  // Seed at budget proportions (exact for identical laws), then refine a
  // local simplex lattice with shrinking steps, depth 4.
  std::vector<double> best(L);
  for (std::size_t k = 0; k < L; ++k) best[k] = budgets[k] / total;
  double best_value = objective(best);
  double step = 1.0 / 12.0;
  for (int depth = 0; depth < 4; ++depth) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = 0; j < L; ++j) {
          if (i == j) continue;
          for (int s = 1; s <= 2; ++s) {
            const double delta = step * s;
            if (best[i] < delta - 1e-15) continue;
            std::vector<double> cand = best;
            cand[i] -= delta;
            cand[j] += delta;
            const double v = objective(cand);
            if (v > best_value + 1e-15) {
              best_value = v;
              best = std::move(cand);
              improved = true;
            }
          }
        }
      }
    }
    step /= 4.0;
  }
  return {best_value, best};
}

}  // namespace fadingmac
