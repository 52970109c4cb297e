// Stationary moments of the scaled JSQ chain and the moment identity for
// h = sum, for a range of system sizes.

#include <cstdio>
#include <cstdlib>

#include "jsqstein/chain/analysis.hpp"
#include "jsqstein/stein/instance.hpp"

int main(int argc, char** argv) {
  const double beta = argc > 1 ? std::atof(argv[1]) : 1.0;
  std::printf("%6s %8s %14s %14s %10s\n", "n", "states", "E X1+X2", "identity rhs", "residual");
  for (int n : {25, 50, 100, 200, 400}) {
    auto inst = jsqstein::stein::solve_instance({n, 1, beta}, jsqstein::chain::TestFunction::Sum);
    const auto mi = jsqstein::chain::moment_identity(*inst.space, inst.pi, inst.sol);
    std::printf("%6d %8zu %14.8f %14.8f %10.2e\n", n, inst.space->size(), mi.mean_sum, mi.rhs, inst.sol.residual);
  }
}
