#pragma once

// A solved JSQ instance: state space, generator, stationary law and the
// Poisson solution for one test function.

#include <bit>
#include <cstdint>
#include <memory>
#include <vector>

#include "jsqstein/chain/analysis.hpp"
#include "jsqstein/chain/generator.hpp"
#include "jsqstein/chain/model.hpp"
#include "jsqstein/chain/solvers.hpp"
#include "jsqstein/chain/state_space.hpp"
#include "jsqstein/util/rng.hpp"

namespace jsqstein::stein {

using chain::ModelParams;
using chain::TestFunction;

struct Instance {
  ModelParams params;
  TestFunction h = TestFunction::Sum;
  std::unique_ptr<chain::StateSpace> space;
  std::unique_ptr<chain::RateMatrix> G;
  std::vector<double> pi;
  chain::PoissonSolution sol;
};

inline Instance solve_instance(const ModelParams& p, TestFunction h,
                               chain::PoissonAnchor anchor = chain::PoissonAnchor::ScaledOrigin,
                               const chain::SolverOptions& opt = {}) {
  p.validate();
  Instance inst;
  inst.params = p;
  inst.h = h;
  inst.space = std::make_unique<chain::StateSpace>(p);
  inst.G = std::make_unique<chain::RateMatrix>(p, *inst.space);
  inst.pi = chain::stationary(*inst.G, opt);
  const auto table = chain::tabulate_test_function(*inst.space, h);
  inst.sol = chain::solve_poisson(*inst.G, table, inst.pi, chain::anchor_state(*inst.space, anchor), opt);
  return inst;
}

/// Seed for the task keyed by (n, b, beta). Keys rather than positions are
/// hashed so that adding or reordering grid entries leaves other streams alone.
inline std::uint64_t instance_seed(std::uint64_t master, const ModelParams& p, std::uint64_t salt = 0) {
  std::uint64_t s = util::derive_seed(master, static_cast<std::uint64_t>(p.n));
  s = util::derive_seed(s, static_cast<std::uint64_t>(p.b));
  s = util::derive_seed(s, std::bit_cast<std::uint64_t>(p.beta));
  return util::derive_seed(s, salt);
}

}  // namespace jsqstein::stein
