// Mean coupling time of the synchronous coupling started one job apart,
// from the fluid point with a growing second queue.

#include <cmath>
#include <cstdio>
#include <vector>

#include "jsqstein/coupling/joint_chain.hpp"
#include "jsqstein/util/rng.hpp"
#include "jsqstein/util/stats.hpp"

using namespace jsqstein;

int main() {
  const int paths = 2000;
  for (int n : {25, 100}) {
    const chain::ModelParams p{n, 1, 1.0};
    const int q1 = static_cast<int>(std::floor(p.arrival_rate()));
    const int r = static_cast<int>(std::sqrt(n));
    for (int q2 : {0, r, 2 * r}) {
      const coupling::Occupancy q{q1, q2};
      for (int cls = 1; cls <= 2; ++cls) {
        if (!coupling::valid_class(p, q, cls)) continue;
        std::vector<double> tau;
        for (int k = 0; k < paths; ++k)
          tau.push_back(coupling::simulate_coupled(p, q, cls, util::derive_seed(7, k)).tau_c);
        const auto est = util::mean_stderr(tau);
        std::printf("n=%-4d q=(%d,%d) class %d  E tau_C = %.4f +- %.4f\n", n, q1, q2, cls, est.mean, est.se);
      }
    }
  }
}
