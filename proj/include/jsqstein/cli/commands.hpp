#pragma once

// Subcommand implementations. Each writes its CSV(s) and a JSON manifest
// "<out>.manifest.json" beside the main output.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "jsqstein/chain/analysis.hpp"
#include "jsqstein/chain/generator.hpp"
#include "jsqstein/chain/solvers.hpp"
#include "jsqstein/chain/state_space.hpp"
#include "jsqstein/cli/config.hpp"
#include "jsqstein/coupling/joint_chain.hpp"
#include "jsqstein/coupling/probe.hpp"
#include "jsqstein/diffusion/engine.hpp"
#include "jsqstein/lattice/property_suite.hpp"
#include "jsqstein/stein/certify.hpp"
#include "jsqstein/stein/instance.hpp"
#include "jsqstein/stein/rate.hpp"
#include "jsqstein/util/csv.hpp"
#include "jsqstein/util/parallel.hpp"
#include "jsqstein/version.hpp"

namespace jsqstein::cli {

using json = nlohmann::ordered_json;

struct RunResult {
  std::vector<std::string> outputs;
  json details = json::object();
  int exit_code = 0;
};

inline std::ofstream open_output(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file '" + path + "'");
  return os;
}

inline std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

/// out itself for a single file, otherwise out with "_<tag>" before the extension.
inline std::string tagged_path(const std::string& out, const std::string& tag, bool single) {
  if (single) return out;
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + "_" + tag + p.extension().string())).string();
}

inline std::string instance_tag(const chain::ModelParams& p) {
  return "n" + std::to_string(p.n) + "_b" + std::to_string(p.b) + "_beta" + util::format_double(p.beta);
}

inline json params_json(const chain::ModelParams& p) {
  return json{{"n", p.n}, {"b", p.b}, {"beta", p.beta}};
}

inline void write_manifest(const RunConfig& c, const RunResult& r) {
  json m;
  m["tool"] = kToolName;
  m["version"] = kVersion;
  m["command"] = c.command;
  m["seed"] = c.seed;
  m["threads"] = c.threads;
  m["seed_scheme"] =
      "task seed = derive_seed chain over (master, n, b, bits(beta)); path k uses derive_seed(task seed, k)";
  json cfg = json::object();
  for (const auto& [k, v] : c.values) cfg[k] = v;
  m["config"] = cfg;
  json grid = json::array();
  for (const auto& p : c.grid) grid.push_back(params_json(p));
  m["grid"] = grid;
  m["outputs"] = r.outputs;
  m["details"] = r.details;
  auto os = open_output(manifest_path(c.out));
  os << m.dump(2) << '\n';
}

inline chain::Occupancy parse_state(const RunConfig& c, const chain::ModelParams& p, int default_q2) {
  const std::string& s = c.get("q");
  chain::Occupancy q(p.levels(), 0);
  if (s == "fluid") {
    q[0] = static_cast<int>(std::floor(p.arrival_rate()));
    q[1] = std::min(default_q2, q[0]);
    return q;
  }
  const auto items = split_list(s);
  if (items.size() != q.size()) {
    throw ConfigError("q must list b+1 = " + std::to_string(q.size()) + " levels for n=" + std::to_string(p.n) +
                      ", got '" + s + "'");
  }
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = parse_number<int>("q", items[j]);
  bool ok = q[0] <= p.n;
  for (std::size_t j = 0; j < q.size(); ++j) ok = ok && q[j] >= 0 && (j == 0 || q[j] <= q[j - 1]);
  if (!ok) {
    throw ConfigError("q = '" + s + "' is not a monotone occupancy in 0..n for n=" + std::to_string(p.n));
  }
  return q;
}

template <class Fn>
void for_each_instance_h(const RunConfig& c, Fn&& fn) {
  for (const auto& p : c.grid)
    for (auto h : c.h) fn(p, h);
}

inline RunResult cmd_stationary(const RunConfig& c) {
  RunResult r;
  std::vector<std::vector<double>> pis(c.grid.size());
  std::vector<double> resid(c.grid.size());
  util::parallel_for(c.grid.size(), c.threads, [&](std::size_t i) {
    chain::StateSpace s(c.grid[i]);
    chain::RateMatrix G(c.grid[i], s);
    pis[i] = chain::stationary(G);
    resid[i] = chain::stationary_residual(G, pis[i]);
  });
  json inst = json::array();
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    const auto path = tagged_path(c.out, instance_tag(c.grid[i]), c.grid.size() == 1);
    chain::StateSpace s(c.grid[i]);
    auto os = open_output(path);
    chain::write_state_table(os, s, pis[i]);
    r.outputs.push_back(path);
    json e = params_json(c.grid[i]);
    e["states"] = s.size();
    e["residual"] = resid[i];
    e["file"] = path;
    inst.push_back(e);
  }
  r.details["instances"] = inst;
  return r;
}

inline RunResult cmd_poisson(const RunConfig& c) {
  RunResult r;
  struct Task {
    chain::ModelParams p;
    chain::TestFunction h;
  };
  std::vector<Task> tasks;
  for_each_instance_h(c, [&](const chain::ModelParams& p, chain::TestFunction h) { tasks.push_back({p, h}); });
  std::vector<stein::Instance> sols(tasks.size());
  util::parallel_for(tasks.size(), c.threads,
                     [&](std::size_t i) { sols[i] = stein::solve_instance(tasks[i].p, tasks[i].h, c.anchor); });
  json inst = json::array();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    std::string tag = instance_tag(tasks[i].p);
    if (c.h.size() > 1) tag += "_h" + chain::to_string(tasks[i].h);
    const auto path = tagged_path(c.out, tag, tasks.size() == 1);
    auto os = open_output(path);
    chain::write_state_table(os, *sols[i].space, sols[i].sol.f);
    r.outputs.push_back(path);
    json e = params_json(tasks[i].p);
    e["h"] = chain::to_string(tasks[i].h);
    e["anchor"] = c.get("anchor");
    e["mean_h"] = sols[i].sol.mean_h;
    e["residual"] = sols[i].sol.residual;
    e["file"] = path;
    inst.push_back(e);
  }
  r.details["instances"] = inst;
  return r;
}

inline RunResult cmd_interp_check(const RunConfig& c) {
  RunResult r;
  const auto rows = lattice::interpolation_property_suite(
      c.seed, c.number<std::size_t>("functions"), c.number<std::size_t>("points"),
      c.number<std::size_t>("smooth_functions"), c.number<std::size_t>("weight_points"));
  auto os = open_output(c.out);
  util::CsvWriter w(os, lattice::check_header());
  lattice::append_check_rows(w, rows);
  r.outputs.push_back(c.out);
  std::size_t failed = 0;
  for (const auto& row : rows) failed += row.pass ? 0 : 1;
  r.details["checks"] = rows.size();
  r.details["failed"] = failed;
  if (failed) r.exit_code = 3;
  return r;
}

inline RunResult cmd_couple(const RunConfig& c) {
  RunResult r;
  const int cls = c.number<int>("class");
  const auto paths = c.number<std::size_t>("couple_paths");
  const auto max_events = c.number<std::uint64_t>("max_events");
  json inst = json::array();
  for (const auto& p : c.grid) {
    const auto q0 = parse_state(c, p, 0);
    if (!coupling::valid_class(p, q0, cls)) {
      throw ConfigError("class " + std::to_string(cls) + " is not admissible at q = '" + c.get("q") +
                        "' for n=" + std::to_string(p.n));
    }
    const std::uint64_t task = stein::instance_seed(c.seed, p);
    std::vector<coupling::CouplingTrace> traces(paths);
    util::parallel_for(paths, c.threads, [&](std::size_t k) {
      traces[k] = coupling::simulate_coupled(p, q0, cls, util::derive_seed(task, k), max_events);
    });
    const auto path = tagged_path(c.out, instance_tag(p), c.grid.size() == 1);
    auto os = open_output(path);
    util::CsvWriter w(os, coupling::coupling_header());
    std::vector<double> tau;
    for (const auto& tr : traces) {
      coupling::append_coupling_row(w, tr);
      tau.push_back(tr.tau_c);
    }
    r.outputs.push_back(path);
    const auto est = util::mean_stderr(tau);
    json e = params_json(p);
    e["q0"] = q0;
    e["class"] = cls;
    e["mean_tau_c"] = est.mean;
    e["stderr"] = est.se;
    e["file"] = path;
    inst.push_back(e);
  }
  r.details["instances"] = inst;
  return r;
}

inline double resolve_gamma(const RunConfig& c, double beta) {
  return c.get("gamma") == "paper" ? coupling::paper_gamma(beta) : c.number<double>("gamma");
}

inline RunResult cmd_probe(const RunConfig& c) {
  RunResult r;
  const auto paths = c.number<std::size_t>("probe_paths");
  const auto max_events = c.number<std::uint64_t>("max_events");
  auto os = open_output(c.out);
  util::CsvWriter w(os, coupling::probe_header());
  json inst = json::array();
  for (const auto& p : c.grid) {
    const double gamma = resolve_gamma(c, p.beta);
    if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
    const int target2 = static_cast<int>(std::min<double>(std::floor(gamma * std::sqrt(static_cast<double>(p.n))), p.n));
    coupling::ProbeTargets tg;
    tg.level1 = c.get("level1") == "n" ? p.n : c.number<int>("level1");
    tg.level2 = c.get("level2") == "gamma" ? target2 : c.number<int>("level2");
    const auto q0 = parse_state(c, p, 2 * target2);
    const auto rows = coupling::hitting_probe(p, q0, tg, paths, stein::instance_seed(c.seed, p), max_events);
    coupling::append_probe_rows(w, p, q0[1], rows);
    json e = params_json(p);
    e["gamma"] = gamma;
    e["level1"] = tg.level1;
    e["level2"] = tg.level2;
    e["q0"] = q0;
    inst.push_back(e);
  }
  r.outputs.push_back(c.out);
  r.details["instances"] = inst;
  return r;
}

inline RunResult cmd_diffusion(const RunConfig& c) {
  RunResult r;
  const double beta = c.number<double>("beta");
  const auto s = diffusion::stationary_sample(beta, c.sim);
  auto os = open_output(c.out);
  diffusion::write_samples(os, s);
  r.outputs.push_back(c.out);
  double min_y1 = INFINITY, total_u = 0, clamp = 0, off = 0, excess = -INFINITY;
  bool monotone = true;
  for (const auto& d : s.diagnostics) {
    min_y1 = std::min(min_y1, d.min_y1);
    total_u += d.total_u;
    clamp += d.clamp_total;
    off += d.off_boundary_du;
    excess = std::max(excess, d.regulator_excess);
    monotone = monotone && d.u_monotone;
  }
  r.details["beta"] = beta;
  r.details["samples"] = s.size();
  r.details["min_y1"] = min_y1;
  r.details["u_monotone"] = monotone;
  r.details["complementarity_violation_fraction"] = total_u > 0 ? off / total_u : 0.0;
  r.details["y2_clamp_total"] = clamp;
  r.details["max_regulator_excess"] = excess;
  const auto y1 = diffusion::sample_mean(s, [](double a, double) { return a; });
  const auto y2 = diffusion::sample_mean(s, [](double, double b) { return b; });
  r.details["mean_y1"] = {{"mean", y1.mean}, {"stderr", y1.se}};
  r.details["mean_y2"] = {{"mean", y2.mean}, {"stderr", y2.se}};
  return r;
}

inline RunResult cmd_rate(const RunConfig& c) {
  RunResult r;
  std::vector<stein::RateRow> rows;
  for (auto h : c.h) {
    auto part = stein::rate_experiment(c.grid, h, c.sim, c.seed, c.threads);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  auto os = open_output(c.out);
  util::CsvWriter w(os, stein::rate_header());
  stein::append_rate_rows(w, rows);
  r.outputs.push_back(c.out);
  json det = json::array();
  for (const auto& row : rows) {
    json e = params_json(row.params);
    e["h"] = chain::to_string(row.h);
    e["exact_mean"] = row.exact_mean;
    e["diffusion_mean"] = row.diffusion_mean.mean;
    e["samples"] = row.diffusion_mean.count;
    e["inconclusive"] = row.inconclusive;
    e["task_seed"] = row.seed;
    if (row.inconclusive) {
      std::cerr << "warning: n=" << row.params.n << " h=" << chain::to_string(row.h)
                << ": stderr exceeds half the error (inconclusive)\n";
    }
    det.push_back(e);
  }
  r.details["rows"] = det;
  return r;
}

inline RunResult cmd_certify(const RunConfig& c) {
  RunResult r;
  struct Task {
    chain::ModelParams p;
    chain::TestFunction h;
  };
  std::vector<Task> tasks;
  for_each_instance_h(c, [&](const chain::ModelParams& p, chain::TestFunction h) { tasks.push_back({p, h}); });
  std::vector<std::vector<stein::BoundRow>> rows(tasks.size());
  util::parallel_for(tasks.size(), c.threads, [&](std::size_t i) {
    rows[i] = stein::certify_bounds(stein::solve_instance(tasks[i].p, tasks[i].h, c.anchor));
  });
  auto os = open_output(c.out);
  util::CsvWriter w(os, stein::certificate_header());
  for (const auto& part : rows) stein::append_certificate_rows(w, part);
  r.outputs.push_back(c.out);
  return r;
}

inline RunResult run_command(const RunConfig& c) {
  RunResult r;
  if (c.command == "stationary") r = cmd_stationary(c);
  else if (c.command == "poisson") r = cmd_poisson(c);
  else if (c.command == "interp-check") r = cmd_interp_check(c);
  else if (c.command == "couple") r = cmd_couple(c);
  else if (c.command == "probe") r = cmd_probe(c);
  else if (c.command == "diffusion") r = cmd_diffusion(c);
  else if (c.command == "rate") r = cmd_rate(c);
  else if (c.command == "certify") r = cmd_certify(c);
  else throw ConfigError("unknown subcommand '" + c.command + "'");
  write_manifest(c, r);
  return r;
}

}  // namespace jsqstein::cli
