#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jsqstein/cli/commands.hpp"
#include "jsqstein/cli/config.hpp"
#include "jsqstein/version.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string seed;
  std::string threads;
  std::string n, b, beta, h;
  std::vector<std::string> set;
};

const char* describe(const std::string& cmd) {
  if (cmd == "stationary") return "stationary distribution per instance (state_id,q_1..,value)";
  if (cmd == "poisson") return "Poisson equation solution f_h per instance (state_id,q_1..,value)";
  if (cmd == "interp-check") return "randomized property suite of the interpolant";
  if (cmd == "couple") return "coupling times of two JSQ copies one customer apart (seed,tau_c,cause,events)";
  if (cmd == "probe") return "hitting-time and race-probability probe (quantity,estimate,stderr,n,beta,b,q2)";
  if (cmd == "diffusion") return "stationary samples of the reflected diffusion (sample_id,y1,y2)";
  if (cmd == "rate") return "E h(X) against E A h(Y) over the n grid (n,b,beta,h,error,stderr,sqrt_n_error)";
  if (cmd == "certify") return "normalized difference bounds of f_h (n,order,h,normalized_sup,region)";
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace jsqstein;
  CLI::App app{"Stein's method toolkit for join-the-shortest-queue in the Halfin-Whitt regime"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Flags f;
  std::string chosen;
  for (const auto& name : cli::subcommands()) {
    auto* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", f.config, "flat key = value configuration file");
    sub->add_option("--out", f.out, "output CSV path (manifest written to <out>.manifest.json)");
    sub->add_option("--seed", f.seed, "master seed (unsigned 64-bit)");
    sub->add_option("--threads", f.threads, "worker threads for independent tasks");
    sub->add_option("--n", f.n, "server counts, comma separated");
    sub->add_option("--b", f.b, "buffer lengths, comma separated");
    sub->add_option("--beta", f.beta, "slack values, comma separated");
    sub->add_option("--test-function", f.h, "test functions: sum, x1, x2, dist_to_fluid, constant");
    sub->add_option("--set", f.set, "override any configuration key (key=value), repeatable");
    sub->callback([&chosen, name] { chosen = name; });
  }
  app.footer("Flags override values from --config. Every run writes a manifest beside its CSV.");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    const cli::KeyValues file = f.config.empty() ? cli::KeyValues{} : cli::read_config_file(f.config);
    cli::KeyValues over = cli::parse_overrides(f.set);
    auto put = [&](const char* key, const std::string& v) {
      if (!v.empty()) over[key] = v;
    };
    put("out", f.out);
    put("seed", f.seed);
    put("threads", f.threads);
    put("n", f.n);
    put("b", f.b);
    put("beta", f.beta);
    put("h", f.h);
    const auto cfg = cli::resolve(chosen, file, over);
    const auto result = cli::run_command(cfg);
    for (const auto& path : result.outputs) std::cout << path << '\n';
    return result.exit_code;
  } catch (const cli::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
