#pragma once

// Run configuration: a flat "key = value" file merged with command-line
// overrides (overrides win), then validated and expanded into a parameter grid.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "jsqstein/chain/analysis.hpp"
#include "jsqstein/chain/model.hpp"
#include "jsqstein/chain/solvers.hpp"
#include "jsqstein/diffusion/engine.hpp"

namespace jsqstein::cli {

using KeyValues = std::map<std::string, std::string>;

/// Raised for invalid user input; the driver maps it to a usage error.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"stationary", "poisson", "interp-check", "couple",
                                              "probe",      "diffusion", "rate",       "certify"};
  return names;
}

/// Every accepted key with its default ("" = no default).
inline const KeyValues& defaults() {
  static const KeyValues d{
      {"n", ""},           {"b", "1"},           {"beta", "1"},       {"h", "sum"},
      {"anchor", "origin"}, {"seed", "1"},       {"threads", "1"},    {"out", ""},
      {"dt", "0.001"},     {"burn_in", "100"},   {"horizon", "1000"}, {"thinning", "100"},
      {"paths", "100"},    {"q", "fluid"},       {"class", "1"},      {"couple_paths", "1000"},
      {"max_events", "10000000"}, {"gamma", "paper"}, {"probe_paths", "1000"}, {"level1", "n"},
      {"level2", "gamma"}, {"functions", "250"}, {"points", "100"},   {"smooth_functions", "20"},
      {"weight_points", "1000"}};
  return d;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Parses "key = value" lines; '#' starts a comment. Later keys override earlier ones.
inline KeyValues parse_key_values(std::istream& is, const std::string& origin) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_key_values(in, path);
}

/// Parses "key=value" override strings.
inline KeyValues parse_overrides(const std::vector<std::string>& items) {
  KeyValues kv;
  for (const auto& it : items) {
    const auto eq = it.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + it + "' is not of the form key=value");
    kv[trim(it.substr(0, eq))] = trim(it.substr(eq + 1));
  }
  return kv;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t' || c == ';') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* b = text.data();
  const char* e = b + text.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) {
    throw ConfigError("key '" + key + "': cannot parse '" + text + "' as a number");
  }
  return v;
}

struct RunConfig {
  std::string command;
  KeyValues values;  // every key, defaults filled in
  std::vector<chain::ModelParams> grid;
  std::vector<chain::TestFunction> h;
  chain::PoissonAnchor anchor = chain::PoissonAnchor::ScaledOrigin;
  diffusion::SimConfig sim;
  std::string out;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  const std::string& get(const std::string& key) const { return values.at(key); }

  template <class T>
  T number(const std::string& key) const {
    return parse_number<T>(key, get(key));
  }
};

inline bool needs_grid(const std::string& command) {
  return command != "interp-check" && command != "diffusion";
}

/// Cartesian product of the n, b and beta lists with duplicates removed
/// (first occurrence kept).
inline std::vector<chain::ModelParams> expand_grid(const KeyValues& kv) {
  std::vector<int> ns, bs;
  std::vector<double> betas;
  for (const auto& s : split_list(kv.at("n"))) ns.push_back(parse_number<int>("n", s));
  for (const auto& s : split_list(kv.at("b"))) bs.push_back(parse_number<int>("b", s));
  for (const auto& s : split_list(kv.at("beta"))) betas.push_back(parse_number<double>("beta", s));
  std::vector<chain::ModelParams> grid;
  for (int n : ns)
    for (int b : bs)
      for (double beta : betas) {
        chain::ModelParams p{n, b, beta};
        try {
          p.validate();
        } catch (const std::exception& e) {
          throw ConfigError("instance n=" + std::to_string(n) + " b=" + std::to_string(b) +
                            " beta=" + util::format_double(beta) + ": " + e.what());
        }
        if (std::find(grid.begin(), grid.end(), p) == grid.end()) grid.push_back(p);
      }
  return grid;
}

/// Merges file values and overrides over the defaults and validates the result.
inline RunConfig resolve(const std::string& command, const KeyValues& file, const KeyValues& overrides) {
  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), command) == subs.end()) {
    throw ConfigError("unknown subcommand '" + command + "'");
  }
  RunConfig c;
  c.command = command;
  c.values = defaults();
  for (const auto* src : {&file, &overrides})
    for (const auto& [k, v] : *src) {
      if (!c.values.count(k)) throw ConfigError("unknown configuration key '" + k + "'");
      c.values[k] = v;
    }
  if (needs_grid(command)) {
    if (split_list(c.get("n")).empty()) throw ConfigError("empty parameter grid: set n (e.g. n = 25,100)");
    c.grid = expand_grid(c.values);
    if (c.grid.empty()) throw ConfigError("empty parameter grid");
  }
  for (const auto& name : split_list(c.get("h"))) {
    try {
      const auto h = chain::parse_test_function(name);
      if (std::find(c.h.begin(), c.h.end(), h) == c.h.end()) c.h.push_back(h);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (c.h.empty()) throw ConfigError("h must name at least one test function");
  const std::string& a = c.get("anchor");
  if (a == "origin") {
    c.anchor = chain::PoissonAnchor::ScaledOrigin;
  } else if (a == "empty") {
    c.anchor = chain::PoissonAnchor::EmptySystem;
  } else {
    throw ConfigError("anchor must be 'origin' or 'empty', got '" + a + "'");
  }
  c.seed = c.number<std::uint64_t>("seed");
  const long threads = c.number<long>("threads");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  c.threads = static_cast<std::size_t>(threads);
  c.sim.dt = c.number<double>("dt");
  c.sim.burn_in = c.number<double>("burn_in");
  c.sim.horizon = c.number<double>("horizon");
  c.sim.thinning = c.number<std::size_t>("thinning");
  c.sim.paths = c.number<std::size_t>("paths");
  c.sim.seed = c.seed;
  try {
    c.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (command == "diffusion") {
    const auto betas = split_list(c.get("beta"));
    if (betas.size() != 1) throw ConfigError("diffusion takes exactly one beta");
    if (!(c.number<double>("beta") > 0.0)) throw ConfigError("beta must be positive");
  }
  c.out = c.get("out").empty() ? command + ".csv" : c.get("out");
  return c;
}

}  // namespace jsqstein::cli
