// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fadingmac/errors.hpp"
#include "fadingmac/fading.hpp"

namespace fadingmac {

inline constexpr const char* kVersion = "1.0.0";

/// Law declaration as it appears in scenario files.
struct LawSpec {
  std::string kind = "rayleigh";  // "rayleigh" | "discrete"
  double mean = 1.0;              // rayleigh
  std::vector<Atom> atoms;        // discrete
  double scale = 1.0;

  FadingLaw build() const {
    FadingLaw law = kind == "discrete" ? FadingLaw::discrete(atoms) : FadingLaw::rayleigh(mean);
    return scale == 1.0 ? law : law.scaled(scale);
  }

  bool operator==(const LawSpec& o) const {
    if (kind != o.kind || mean != o.mean || scale != o.scale || atoms.size() != o.atoms.size())
      return false;
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (atoms[i].gain != o.atoms[i].gain || atoms[i].prob != o.atoms[i].prob) return false;
    return true;
  }
};

/// Parsed scenario: users, budgets, laws, strategy selection, simulation
/// controls. Laws hold either one shared entry or one per user.
struct Scenario {
  int users = 1;
  std::vector<double> budgets = {1.0};
  std::vector<LawSpec> laws = {LawSpec{}};
  double noise = 1.0;
  int grid = kDefaultGrid;
  std::uint64_t seed = 0;
  std::uint64_t blocks = 100000;
  int workers = 1;
  std::string strategy = "midpoint";  // midpoint | alpha | tdma | vsplit | group | otdma | look
  std::vector<double> thresholds;
  std::vector<double> threshold_quantiles;
  double pv = 0.0;        // virtual-split per-virtual-user budget
  int look_users = 0;     // K
  int look_active = 0;    // L

  /// Effective per-user laws with noise folded in as a 1/noise gain scale, so
  /// every downstream formula runs against unit noise.
  std::vector<FadingLaw> build_laws() const {
    std::vector<FadingLaw> out;
    out.reserve(static_cast<std::size_t>(users));
    for (int u = 0; u < users; ++u) {
      const LawSpec& spec = laws.size() == 1 ? laws[0] : laws[static_cast<std::size_t>(u)];
      FadingLaw law = spec.build();
      if (noise != 1.0) law = law.scaled(1.0 / noise);
      out.push_back(std::move(law));
    }
    return out;
  }

  double total_budget() const {
    double t = 0.0;
    for (double b : budgets) t += b;
    return t;
  }

  bool operator==(const Scenario& o) const {
    return users == o.users && budgets == o.budgets && laws == o.laws && noise == o.noise &&
           grid == o.grid && seed == o.seed && blocks == o.blocks && workers == o.workers &&
           strategy == o.strategy && thresholds == o.thresholds &&
           threshold_quantiles == o.threshold_quantiles && pv == o.pv &&
           look_users == o.look_users && look_active == o.look_active;
  }
};

namespace detail {

struct ScenarioValue {
  std::string raw;
  int line = 0;
};

inline double parse_number(const std::string& s, const std::string& key, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw parse_error("expected a number, got '" + s + "'", key, line);
  }
}

inline std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

// Split a bracketed list "[a, b, [c, d]]" one level deep.
inline std::vector<std::string> split_list(const std::string& s, const std::string& key, int line) {
  const std::string body = strip(s);
  if (body.size() < 2 || body.front() != '[' || body.back() != ']')
    throw parse_error("expected a [...] list", key, line);
  std::vector<std::string> items;
  int depth = 0;
  std::string cur;
  for (std::size_t i = 1; i + 1 < body.size(); ++i) {
    const char c = body[i];
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      items.push_back(strip(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!strip(cur).empty()) items.push_back(strip(cur));
  if (depth != 0) throw parse_error("unbalanced brackets", key, line);
  return items;
}

inline std::vector<double> parse_number_list(const std::string& s, const std::string& key,
                                             int line) {
  std::vector<double> out;
  for (const std::string& item : split_list(s, key, line))
    out.push_back(parse_number(item, key, line));
  return out;
}

inline std::vector<Atom> parse_atoms(const std::string& s, const std::string& key, int line) {
  std::vector<Atom> out;
  for (const std::string& item : split_list(s, key, line)) {
    const std::vector<double> pair = parse_number_list(item, key, line);
    if (pair.size() != 2) throw parse_error("each atom needs [gain, prob]", key, line);
    out.push_back({pair[0], pair[1]});
  }
  return out;
}

}  // namespace detail

/// Parse the line-based `key = value` scenario format. Unknown keys, length
/// mismatches and invalid values raise parse_error naming key and line.
inline Scenario parse_scenario(const std::string& text) {
  std::map<std::string, detail::ScenarioValue> kv;
  {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      // comments start at '#' outside quotes
      bool quoted = false;
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) {
          line = line.substr(0, i);
          break;
        }
      }
      const std::string stripped = detail::strip(line);
      if (stripped.empty()) continue;
      const std::size_t eq = stripped.find('=');
      if (eq == std::string::npos)
        throw parse_error("expected 'key = value'", stripped, line_no);
      const std::string key = detail::strip(stripped.substr(0, eq));
      const std::string value = detail::strip(stripped.substr(eq + 1));
      if (key.empty()) throw parse_error("empty key", stripped, line_no);
      if (kv.count(key)) throw parse_error("duplicate key", key, line_no);
      kv[key] = {value, line_no};
    }
  }

  Scenario sc;
  sc.laws.clear();
  std::map<int, LawSpec> law_by_user;  // 0 = shared

  auto take = [&kv](const std::string& key) -> std::optional<detail::ScenarioValue> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    detail::ScenarioValue v = it->second;
    kv.erase(it);
    return v;
  };

  if (auto v = take("users")) sc.users = static_cast<int>(detail::parse_number(v->raw, "users", v->line));
  if (auto v = take("budgets")) sc.budgets = detail::parse_number_list(v->raw, "budgets", v->line);
  if (auto v = take("noise")) sc.noise = detail::parse_number(v->raw, "noise", v->line);
  if (auto v = take("grid")) sc.grid = static_cast<int>(detail::parse_number(v->raw, "grid", v->line));
  if (auto v = take("seed"))
    sc.seed = static_cast<std::uint64_t>(detail::parse_number(v->raw, "seed", v->line));
  if (auto v = take("blocks"))
    sc.blocks = static_cast<std::uint64_t>(detail::parse_number(v->raw, "blocks", v->line));
  if (auto v = take("workers"))
    sc.workers = static_cast<int>(detail::parse_number(v->raw, "workers", v->line));
  if (auto v = take("strategy")) sc.strategy = detail::unquote(v->raw);
  if (auto v = take("thresholds")) sc.thresholds = detail::parse_number_list(v->raw, "thresholds", v->line);
  if (auto v = take("threshold_quantiles"))
    sc.threshold_quantiles = detail::parse_number_list(v->raw, "threshold_quantiles", v->line);
  if (auto v = take("pv")) sc.pv = detail::parse_number(v->raw, "pv", v->line);
  if (auto v = take("look_users"))
    sc.look_users = static_cast<int>(detail::parse_number(v->raw, "look_users", v->line));
  if (auto v = take("look_active"))
    sc.look_active = static_cast<int>(detail::parse_number(v->raw, "look_active", v->line));

  // law.* (shared) and law<k>.* (per user, 1-based)
  std::vector<std::pair<std::string, detail::ScenarioValue>> law_keys;
  for (const auto& [key, value] : kv)
    if (key.rfind("law", 0) == 0) law_keys.emplace_back(key, value);
  for (const auto& [key, value] : law_keys) {
    const std::size_t dot = key.find('.');
    if (dot == std::string::npos) throw parse_error("unknown key", key, value.line);
    const std::string head = key.substr(0, dot);
    const std::string field = key.substr(dot + 1);
    int user = 0;
    if (head != "law") {
      try {
        user = std::stoi(head.substr(3));
      } catch (const std::exception&) {
        throw parse_error("unknown key", key, value.line);
      }
      if (user < 1) throw parse_error("law index must be >= 1", key, value.line);
    }
    LawSpec& spec = law_by_user[user];
    if (field == "kind") {
      spec.kind = detail::unquote(value.raw);
      if (spec.kind != "rayleigh" && spec.kind != "discrete")
        throw parse_error("law kind must be \"rayleigh\" or \"discrete\"", key, value.line);
    } else if (field == "mean") {
      spec.mean = detail::parse_number(value.raw, key, value.line);
      if (!(spec.mean > 0.0)) throw parse_error("law mean must be positive", key, value.line);
    } else if (field == "atoms") {
      spec.atoms = detail::parse_atoms(value.raw, key, value.line);
    } else if (field == "scale") {
      spec.scale = detail::parse_number(value.raw, key, value.line);
      if (!(spec.scale > 0.0)) throw parse_error("law scale must be positive", key, value.line);
    } else {
      throw parse_error("unknown key", key, value.line);
    }
    kv.erase(key);
  }

  if (!kv.empty()) {
    const auto& [key, value] = *kv.begin();
    throw parse_error("unknown key", key, value.line);
  }

  // assemble laws: shared entry or exactly one per user
  if (law_by_user.empty()) {
    sc.laws.push_back(LawSpec{});
  } else if (law_by_user.count(0)) {
    if (law_by_user.size() != 1)
      throw parse_error("mix of shared law.* and per-user law<k>.* entries", "law", 0);
    sc.laws.push_back(law_by_user[0]);
  } else {
    for (int u = 1; u <= sc.users; ++u) {
      const auto it = law_by_user.find(u);
      if (it == law_by_user.end())
        throw parse_error("missing law for user " + std::to_string(u), "law" + std::to_string(u), 0);
      sc.laws.push_back(it->second);
    }
    if (static_cast<int>(law_by_user.size()) != sc.users)
      throw parse_error("law index beyond user count", "law", 0);
  }

  // validation
  if (sc.users < 1) throw parse_error("users must be >= 1", "users", 0);
  if (static_cast<int>(sc.budgets.size()) == 1 && sc.users > 1)
    sc.budgets.assign(static_cast<std::size_t>(sc.users), sc.budgets[0]);
  if (static_cast<int>(sc.budgets.size()) != sc.users)
    throw parse_error("budgets length must equal users", "budgets", 0);
  for (double b : sc.budgets)
    if (!(b >= 0.0)) throw parse_error("budgets must be nonnegative", "budgets", 0);
  if (!(sc.noise > 0.0)) throw parse_error("noise must be positive", "noise", 0);
  if (sc.grid < 1) throw parse_error("grid must be >= 1", "grid", 0);
  if (sc.workers < 1) throw parse_error("workers must be >= 1", "workers", 0);
  for (const LawSpec& spec : sc.laws)
    if (spec.kind == "discrete" && spec.atoms.empty())
      throw parse_error("discrete law needs atoms", "law.atoms", 0);
  return sc;
}

/// Canonical serialization; parse(serialize(s)) == s.
inline std::string serialize(const Scenario& sc) {
  std::ostringstream out;
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "users = " << sc.users << "\n";
  out << "budgets = [";
  for (std::size_t i = 0; i < sc.budgets.size(); ++i)
    out << (i ? ", " : "") << num(sc.budgets[i]);
  out << "]\n";
  out << "noise = " << num(sc.noise) << "\n";
  out << "grid = " << sc.grid << "\n";
  out << "seed = " << sc.seed << "\n";
  out << "blocks = " << sc.blocks << "\n";
  out << "workers = " << sc.workers << "\n";
  out << "strategy = \"" << sc.strategy << "\"\n";
  auto law_block = [&](const std::string& prefix, const LawSpec& spec) {
    out << prefix << ".kind = \"" << spec.kind << "\"\n";
    if (spec.kind == "rayleigh") out << prefix << ".mean = " << num(spec.mean) << "\n";
    if (spec.kind == "discrete") {
      out << prefix << ".atoms = [";
      for (std::size_t i = 0; i < spec.atoms.size(); ++i)
        out << (i ? ", " : "") << "[" << num(spec.atoms[i].gain) << ", " << num(spec.atoms[i].prob)
            << "]";
      out << "]\n";
    }
    if (spec.scale != 1.0) out << prefix << ".scale = " << num(spec.scale) << "\n";
  };
  if (sc.laws.size() == 1) {
    law_block("law", sc.laws[0]);
  } else {
    for (std::size_t i = 0; i < sc.laws.size(); ++i)
      law_block("law" + std::to_string(i + 1), sc.laws[i]);
  }
  if (!sc.thresholds.empty()) {
    out << "thresholds = [";
    for (std::size_t i = 0; i < sc.thresholds.size(); ++i)
      out << (i ? ", " : "") << num(sc.thresholds[i]);
    out << "]\n";
  }
  if (!sc.threshold_quantiles.empty()) {
    out << "threshold_quantiles = [";
    for (std::size_t i = 0; i < sc.threshold_quantiles.size(); ++i)
      out << (i ? ", " : "") << num(sc.threshold_quantiles[i]);
    out << "]\n";
  }
  if (sc.pv != 0.0) out << "pv = " << num(sc.pv) << "\n";
  if (sc.look_users != 0) out << "look_users = " << sc.look_users << "\n";
  if (sc.look_active != 0) out << "look_active = " << sc.look_active << "\n";
  return out.str();
}

/// FNV-1a over the canonical serialization; recorded in run manifests.
inline std::uint64_t scenario_hash(const Scenario& sc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : serialize(sc)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace fadingmac
