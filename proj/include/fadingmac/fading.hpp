// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fadingmac/errors.hpp"
#include "fadingmac/rng.hpp"

namespace fadingmac {

/// Default midpoint-quantile grid size for capacity integrals.
inline constexpr int kDefaultGrid = 20000;

/// One point mass of a discrete power-gain law.
struct Atom {
  double gain = 0.0;
  double prob = 0.0;
};

/// Quadrature node: integrates f against the law as sum of f(gain) * weight.
struct GainNode {
  double gain = 0.0;
  double weight = 0.0;
};

namespace detail {

class LawImpl {
 public:
  virtual ~LawImpl() = default;
  // x is guaranteed in (0,1) by the caller.
  virtual double quantile_unchecked(double x) const = 0;
  virtual double cdf(double g) const = 0;
  virtual double mean() const = 0;
  virtual const std::vector<Atom>* atoms() const { return nullptr; }
};

class DiscreteLaw final : public LawImpl {
 public:
  explicit DiscreteLaw(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw contract_error("discrete law needs at least one atom");
    // compensated sum: the 1e-12 normalization check must not drown in
    // accumulation error for 1e5-atom quantized laws
    double total = 0.0, comp = 0.0;
    double prev = -1.0;
    for (const Atom& a : atoms_) {
      if (!(a.gain >= 0.0)) throw contract_error("discrete law gains must be nonnegative");
      if (!(a.gain > prev)) throw contract_error("discrete law gains must be strictly increasing");
      if (!(a.prob > 0.0)) throw contract_error("discrete law masses must be positive");
      prev = a.gain;
      const double t = total + a.prob;
      comp += std::abs(total) >= std::abs(a.prob) ? (total - t) + a.prob : (a.prob - t) + total;
      total = t;
    }
    total += comp;
    if (std::abs(total - 1.0) > 1e-12)
      throw contract_error("discrete law masses must sum to 1 (got " + std::to_string(total) + ")");
    cum_.reserve(atoms_.size());
    double c = 0.0;
    for (const Atom& a : atoms_) {
      c += a.prob;
      cum_.push_back(c);
    }
    cum_.back() = 1.0;
  }

  double quantile_unchecked(double x) const override {
    // min h : F(h) >= x
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), x);
    const std::size_t i = it == cum_.end() ? cum_.size() - 1 : static_cast<std::size_t>(it - cum_.begin());
    return atoms_[i].gain;
  }

  double cdf(double g) const override {
    double c = 0.0;
    for (std::size_t i = 0; i < atoms_.size() && atoms_[i].gain <= g; ++i) c = cum_[i];
    return c;
  }

  double mean() const override {
    double m = 0.0;
    for (const Atom& a : atoms_) m += a.gain * a.prob;
    return m;
  }

  const std::vector<Atom>* atoms() const override { return &atoms_; }

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cum_;
};

// Power gain of a Rayleigh-amplitude link: exponential with the given mean.
class ExponentialLaw final : public LawImpl {
 public:
  explicit ExponentialLaw(double mean) : mean_(mean) {
    if (!(mean > 0.0)) throw contract_error("exponential law mean must be positive");
  }
  double quantile_unchecked(double x) const override { return -mean_ * std::log1p(-x); }
  double cdf(double g) const override { return g <= 0.0 ? 0.0 : -std::expm1(-g / mean_); }
  double mean() const override { return mean_; }

 private:
  double mean_;
};

// Tabulated quantile curve, linear interpolation between knots.
class TableLaw final : public LawImpl {
 public:
  TableLaw(std::vector<double> xs, std::vector<double> qs)
      : xs_(std::move(xs)), qs_(std::move(qs)) {
    if (xs_.size() != qs_.size() || xs_.size() < 2)
      throw contract_error("quantile table needs matching x/q vectors with >= 2 knots");
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      if (!(xs_[i] > 0.0 && xs_[i] < 1.0)) throw contract_error("quantile table x must lie in (0,1)");
      if (!(qs_[i] >= 0.0)) throw contract_error("quantile table values must be nonnegative");
      if (i > 0 && !(xs_[i] > xs_[i - 1])) throw contract_error("quantile table x must be increasing");
      if (i > 0 && qs_[i] < qs_[i - 1]) throw contract_error("quantile table must be nondecreasing");
    }
  }

  double quantile_unchecked(double x) const override {
    if (x <= xs_.front()) return qs_.front();
    if (x >= xs_.back()) return qs_.back();
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
    const double t = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
    return qs_[i - 1] + t * (qs_[i] - qs_[i - 1]);
  }

  double cdf(double g) const override {
    if (g < qs_.front()) return 0.0;
    if (g >= qs_.back()) return 1.0;
    // sup { x : quantile(x) <= g } by bisection over the knot span
    double lo = xs_.front(), hi = xs_.back();
    for (int it = 0; it < 64; ++it) {
      const double mid = 0.5 * (lo + hi);
      (quantile_unchecked(mid) <= g ? lo : hi) = mid;
    }
    return lo;
  }

  double mean() const override {
    double m = 0.0;
    const int n = kDefaultGrid;
    for (int j = 0; j < n; ++j) m += quantile_unchecked((j + 0.5) / n);
    return m / n;
  }

 private:
  std::vector<double> xs_, qs_;
};

class ScaledLaw final : public LawImpl {
 public:
  ScaledLaw(std::shared_ptr<const LawImpl> base, double scale)
      : base_(std::move(base)), scale_(scale) {}
  double quantile_unchecked(double x) const override { return scale_ * base_->quantile_unchecked(x); }
  double cdf(double g) const override { return base_->cdf(g / scale_); }
  double mean() const override { return scale_ * base_->mean(); }

 private:
  std::shared_ptr<const LawImpl> base_;
  double scale_;
};

// Law of the maximum of L independent draws: F^L, quantile x -> Q(x^(1/L)).
class MaxOrderLaw final : public LawImpl {
 public:
  MaxOrderLaw(std::shared_ptr<const LawImpl> base, int order)
      : base_(std::move(base)), order_(order) {}
  double quantile_unchecked(double x) const override {
    return base_->quantile_unchecked(std::pow(x, 1.0 / order_));
  }
  double cdf(double g) const override { return std::pow(base_->cdf(g), order_); }
  double mean() const override {
    double m = 0.0;
    const int n = kDefaultGrid;
    for (int j = 0; j < n; ++j) m += quantile_unchecked((j + 0.5) / n);
    return m / n;
  }

 private:
  std::shared_ptr<const LawImpl> base_;
  int order_;
};

// Density reweighted per threshold bracket. Bracket m covers base cdf mass
// (q[m-1], q[m]); its weight is (q[m]^L - q[m-1]^L) / (q[m] - q[m-1]), so the
// transformed cdf at the bracket ends is q[m]^L. One bracket with a single
// threshold reproduces the 1-bit partial-CSI law: weight mu(B)^(L-1) below the
// threshold and (1 + zeta) above it.
class BracketReweightLaw final : public LawImpl {
 public:
  BracketReweightLaw(std::shared_ptr<const LawImpl> base, std::vector<double> cuts, int order)
      : base_(std::move(base)), order_(order) {
    // cuts are base-cdf levels, strictly inside (0,1), increasing
    bounds_.push_back(0.0);
    for (double c : cuts) bounds_.push_back(c);
    bounds_.push_back(1.0);
    tbounds_.reserve(bounds_.size());
    for (double b : bounds_) tbounds_.push_back(std::pow(b, order_));
  }

  double quantile_unchecked(double x) const override {
    const std::size_t m = bracket_of_transformed(x);
    const double w = tbounds_[m + 1] - tbounds_[m];
    const double b = bounds_[m + 1] - bounds_[m];
    const double xb = bounds_[m] + (x - tbounds_[m]) * (b / w);
    return base_->quantile_unchecked(std::clamp(xb, 1e-300, 1.0 - 1e-16));
  }

  double cdf(double g) const override {
    const double f = base_->cdf(g);
    const std::size_t m = bracket_of_base(f);
    const double w = tbounds_[m + 1] - tbounds_[m];
    const double b = bounds_[m + 1] - bounds_[m];
    return tbounds_[m] + (f - bounds_[m]) * (w / b);
  }

  double mean() const override {
    double m = 0.0;
    const int n = kDefaultGrid;
    for (int j = 0; j < n; ++j) m += quantile_unchecked((j + 0.5) / n);
    return m / n;
  }

 private:
  std::size_t bracket_of_transformed(double x) const {
    for (std::size_t m = 0; m + 2 < tbounds_.size(); ++m)
      if (x <= tbounds_[m + 1]) return m;
    return tbounds_.size() - 2;
  }
  std::size_t bracket_of_base(double f) const {
    for (std::size_t m = 0; m + 2 < bounds_.size(); ++m)
      if (f <= bounds_[m + 1]) return m;
    return bounds_.size() - 2;
  }

  std::shared_ptr<const LawImpl> base_;
  int order_;
  std::vector<double> bounds_;   // base cdf levels, 0 .. 1
  std::vector<double> tbounds_;  // bounds^order
};

}  // namespace detail

/// Distribution of a link's power gain g = |h|^2.
class FadingLaw {
 public:
  static FadingLaw discrete(std::vector<Atom> atoms) {
    return FadingLaw(std::make_shared<detail::DiscreteLaw>(std::move(atoms)));
  }
  static FadingLaw point_mass(double gain) { return discrete({{gain, 1.0}}); }
  /// Rayleigh-amplitude fading: exponential power gain with the given mean.
  static FadingLaw rayleigh(double mean_power) {
    return FadingLaw(std::make_shared<detail::ExponentialLaw>(mean_power));
  }
  static FadingLaw quantile_table(std::vector<double> xs, std::vector<double> qs) {
    return FadingLaw(std::make_shared<detail::TableLaw>(std::move(xs), std::move(qs)));
  }

  /// Law of c * G. Discrete and exponential stay exact under scaling.
  FadingLaw scaled(double c) const {
    if (!(c > 0.0)) throw contract_error("scale must be positive");
    if (c == 1.0) return *this;
    if (const auto* as = impl_->atoms()) {
      std::vector<Atom> scaled_atoms = *as;
      for (Atom& a : scaled_atoms) a.gain *= c;
      return discrete(std::move(scaled_atoms));
    }
    return FadingLaw(std::make_shared<detail::ScaledLaw>(impl_, c));
  }

  /// Law of max(G_1..G_L), L independent draws of this law.
  FadingLaw max_of(int order) const {
    if (order < 1) throw contract_error("max_of order must be >= 1");
    if (order == 1) return *this;
    if (const auto* as = impl_->atoms()) {
      std::vector<Atom> out;
      out.reserve(as->size());
      double prev_f = 0.0, f = 0.0;
      for (const Atom& a : *as) {
        f += a.prob;
        const double mass = std::pow(std::min(f, 1.0), order) - std::pow(prev_f, order);
        if (mass > 0.0) out.push_back({a.gain, mass});
        prev_f = std::min(f, 1.0);
      }
      out.back().prob += 1.0 - std::pow(prev_f, order);  // close rounding drift at 1
      return discrete(std::move(out));
    }
    return FadingLaw(std::make_shared<detail::MaxOrderLaw>(impl_, order));
  }

  /// Reweighted law for symmetric threshold CSI: thresholds partition the
  /// gain axis into brackets [t_m, t_{m+1}) and the bracket with base mass
  /// p_m is reweighted by (q_m^L - q_{m-1}^L) / (L p_m) relative odds, scaled
  /// so the total mass stays 1. Degenerate thresholds (no mass on one side)
  /// leave the law unchanged.
  FadingLaw reweighted_by_brackets(const std::vector<double>& thresholds, int order) const {
    if (order < 1) throw contract_error("reweight order must be >= 1");
    std::vector<double> cuts;
    double prev_t = -1.0;
    for (double t : thresholds) {
      if (!(t >= 0.0) || !(t > prev_t))
        throw contract_error("thresholds must be nonnegative and strictly increasing");
      prev_t = t;
      const double q = mass_below(t);  // t below/above the support is degenerate
      if (q > 0.0 && q < 1.0) cuts.push_back(q);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    if (cuts.empty() || order == 1) return *this;

    if (const auto* as = impl_->atoms()) {
      std::vector<double> bounds = {0.0};
      bounds.insert(bounds.end(), cuts.begin(), cuts.end());
      bounds.push_back(1.0);
      std::vector<Atom> out;
      out.reserve(as->size());
      double f = 0.0;
      for (const Atom& a : *as) {
        // bracket by P(G < gain): left-closed brackets in the gain domain
        std::size_t m = 0;
        while (m + 2 < bounds.size() && f >= bounds[m + 1] - 1e-15) ++m;
        const double w = (std::pow(bounds[m + 1], order) - std::pow(bounds[m], order)) /
                         (bounds[m + 1] - bounds[m]);
        out.push_back({a.gain, a.prob * w});
        f += a.prob;
      }
      double total = 0.0;
      for (const Atom& a : out) total += a.prob;
      for (Atom& a : out) a.prob /= total;  // total is 1 up to rounding
      return discrete(std::move(out));
    }
    return FadingLaw(std::make_shared<detail::BracketReweightLaw>(impl_, cuts, order));
  }

  /// Generalized inverse cdf: min h such that F(h) >= x.
  double quantile(double x) const {
    if (!(x > 0.0 && x < 1.0)) throw std::domain_error("quantile argument must lie in (0,1)");
    return impl_->quantile_unchecked(x);
  }

  /// P(G <= g).
  double cdf(double g) const { return impl_->cdf(g); }

  /// P(G < g); differs from cdf only at atoms.
  double mass_below(double g) const {
    if (const auto* as = impl_->atoms()) {
      double c = 0.0;
      for (const Atom& a : *as) {
        if (a.gain < g) c += a.prob; else break;
      }
      return c;
    }
    return impl_->cdf(g);
  }

  double mean() const { return impl_->mean(); }

  bool is_discrete() const { return impl_->atoms() != nullptr; }

  const std::vector<Atom>& atoms() const& {
    const auto* as = impl_->atoms();
    if (!as) throw contract_error("atoms() requires a discrete law");
    return *as;
  }
  // rvalue laws hand out a copy so `for (auto& a : f().atoms())` cannot dangle
  std::vector<Atom> atoms() const&& { return atoms(); }

  /// n-point discrete law on the midpoint-quantile grid x_j = (j - 1/2)/n.
  FadingLaw quantize(int n) const {
    if (n < 1) throw contract_error("quantize needs n >= 1");
    std::vector<Atom> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const double g = impl_->quantile_unchecked((j + 0.5) / n);
      if (!out.empty() && g <= out.back().gain)
        out.back().prob += 1.0 / n;  // regroup repeated support points
      else
        out.push_back({g, 1.0 / n});
    }
    return discrete(std::move(out));
  }

  /// Quadrature nodes for integrals against dPsi. Discrete laws integrate
  /// exactly over their atoms; continuous laws use the quantile grid.
  std::vector<GainNode> nodes(int grid_n = kDefaultGrid) const {
    std::vector<GainNode> out;
    if (const auto* as = impl_->atoms()) {
      out.reserve(as->size());
      for (const Atom& a : *as) out.push_back({a.gain, a.prob});
      return out;
    }
    if (grid_n < 1) throw contract_error("grid size must be >= 1");
    out.reserve(static_cast<std::size_t>(grid_n));
    for (int j = 0; j < grid_n; ++j)
      out.push_back({impl_->quantile_unchecked((j + 0.5) / grid_n), 1.0 / grid_n});
    return out;
  }

  /// Quantile-transform draw.
  double sample(double u) const { return quantile(u); }

 private:
  explicit FadingLaw(std::shared_ptr<const detail::LawImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const detail::LawImpl> impl_;
};

/// One independent draw per law, deterministic in (seed, block).
inline std::vector<double> sample_block(std::span<const FadingLaw> laws, const BlockRng& rng) {
  if (laws.empty()) throw contract_error("sample_block needs at least one law");
  std::vector<double> gains(laws.size());
  for (std::size_t i = 0; i < laws.size(); ++i) gains[i] = laws[i].sample(rng.uniform(i));
  return gains;
}

}  // namespace fadingmac
