#pragma once

// Monte Carlo counterparts of the closed forms and the hitting-time probes.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <ostream>
#include <string>
#include <vector>

#include "jsqstein/chain/simulate.hpp"
#include "jsqstein/coupling/closed_forms.hpp"
#include "jsqstein/coupling/joint_chain.hpp"
#include "jsqstein/util/csv.hpp"
#include "jsqstein/util/rng.hpp"
#include "jsqstein/util/stats.hpp"

namespace jsqstein::coupling {

using util::Estimate;

/// Gillespie estimate of the time for Q_1 to climb from q1 to q1 + 1 (empty buffers).
inline Estimate mc_hitting_time_up(const ModelParams& p, int q1, std::size_t paths, std::uint64_t seed) {
  std::vector<double> times;
  times.reserve(paths);
  for (std::size_t k = 0; k < paths; ++k) {
    util::Stream rng(seed, k);
    Occupancy q(static_cast<std::size_t>(p.levels()), 0);
    q[0] = q1;
    double t = 0.0;
    while (q[0] != q1 + 1) {
      auto ev = chain::next_event(p, q, rng);
      t += ev->dt;
      q[static_cast<std::size_t>(ev->move.level)] += ev->move.step;
    }
    times.push_back(t);
  }
  return util::mean_stderr(times);
}

struct RuinMonteCarlo {
  Estimate mgf;          // E s^{D_z}
  Estimate ruin;         // P(hit 0 before a)
  Estimate laplace;      // E exp(-sum of rate-r exponential play times)
};

/// Simulated gambler's ruin games.
inline RuinMonteCarlo mc_ruin(const RuinParams& rp, double s, std::size_t games, std::uint64_t seed) {
  rp.validate();
  std::vector<double> mgf, ruin, lap;
  mgf.reserve(games);
  ruin.reserve(games);
  lap.reserve(games);
  const double ls = std::log(s);
  for (std::size_t g = 0; g < games; ++g) {
    util::Stream rng(seed, g);
    int w = rp.z;
    std::uint64_t d = 0;
    double elapsed = 0.0;
    while (w > 0 && w < rp.a) {
      w += rng.uniform() < rp.p ? 1 : -1;
      ++d;
      elapsed += rng.exponential(rp.r);
    }
    mgf.push_back(std::exp(static_cast<double>(d) * ls));
    ruin.push_back(w == 0 ? 1.0 : 0.0);
    lap.push_back(std::exp(-elapsed));
  }
  return {util::mean_stderr(mgf), util::mean_stderr(ruin), util::mean_stderr(lap)};
}

struct ProbeRow {
  std::string quantity;
  Estimate value;
};

struct ProbeTargets {
  int level1 = 0;  // target for Q_1
  int level2 = 0;  // target for Q_2
};

/// First-passage statistics from q: with tau_1 the first time Q_1 = level1 and
/// tau_2 the first time Q_2 = level2, estimates E tau_2, E (tau_2 ^ tau_1),
/// P(tau_2 > tau_1), and for the coupled chain started in class 1 (or the
/// lowest admissible class) P(tau_C >= first time Q_1 = n).
/// Throws std::runtime_error if a path needs more than max_events events to reach level2.
inline std::vector<ProbeRow> hitting_probe(const ModelParams& p, const Occupancy& q0, ProbeTargets tg,
                                           std::size_t paths, std::uint64_t seed,
                                           std::uint64_t max_events = 100'000'000) {
  p.validate();
  if (q0.size() != static_cast<std::size_t>(p.levels()) || p.levels() < 2)
    throw std::invalid_argument("probe start state has the wrong length");
  if (tg.level1 < 0 || tg.level1 > p.n || tg.level2 < 0 || tg.level2 > p.n)
    throw std::invalid_argument("probe levels must lie in 0..n");
  std::vector<double> t2, tmin, race, early;
  int cls = 0;
  for (int i = 1; i <= p.levels(); ++i)
    if (valid_class(p, q0, i)) {
      cls = i;
      break;
    }
  for (std::size_t k = 0; k < paths; ++k) {
    util::Stream rng(seed, 2 * k);
    Occupancy q = q0;
    double t = 0.0, tau1 = q[0] == tg.level1 ? 0.0 : -1.0, tau2 = q[1] == tg.level2 ? 0.0 : -1.0;
    std::uint64_t events = 0;
    while (tau2 < 0.0) {
      if (++events > max_events) {
        throw std::runtime_error("probe: Q_2 did not reach level " + std::to_string(tg.level2) + " within " +
                                 std::to_string(max_events) + " events (target above the start is rarely hit; "
                                 "lower gamma or start above the target)");
      }
      auto ev = chain::next_event(p, q, rng);
      t += ev->dt;
      q[static_cast<std::size_t>(ev->move.level)] += ev->move.step;
      if (tau1 < 0.0 && q[0] == tg.level1) tau1 = t;
      if (q[1] == tg.level2) tau2 = t;
    }
    t2.push_back(tau2);
    const double m = tau1 < 0.0 ? tau2 : std::min(tau1, tau2);
    tmin.push_back(m);
    race.push_back(tau1 >= 0.0 && tau2 > tau1 ? 1.0 : 0.0);
    if (cls > 0) {
      util::Stream crng(seed, 2 * k + 1);
      JointState s{q0, cls};
      double tc = 0.0;
      bool full = q0[0] == p.n;
      const double inf = std::numeric_limits<double>::infinity();
      while (!s.coupled() && !full) {
        joint_step(p, s, tc, inf, crng);
        if (s.base[0] == p.n) full = true;
      }
      // tau_C >= tau_1(n) when Q_1 reached n no later than the merge.
      early.push_back(full ? 1.0 : 0.0);
    }
  }
  std::vector<ProbeRow> rows{{"E_tau2", util::mean_stderr(t2)},
                             {"E_min_tau2_tau1", util::mean_stderr(tmin)},
                             {"P_tau2_gt_tau1", util::mean_stderr(race)}};
  if (cls > 0) rows.push_back({"P_tauC_ge_tau1n", util::mean_stderr(early)});
  return rows;
}

inline std::vector<std::string> probe_header() { return {"quantity", "estimate", "stderr", "n", "beta", "b", "q2"}; }

inline void append_probe_rows(util::CsvWriter& w, const ModelParams& p, int q2, const std::vector<ProbeRow>& rows) {
  for (const auto& r : rows) {
    w << r.quantity << r.value.mean << r.value.se << p.n << p.beta << p.b << q2;
    w.end_row();
  }
}

inline std::vector<std::string> coupling_header() { return {"seed", "tau_c", "cause", "events"}; }

inline void append_coupling_row(util::CsvWriter& w, const CouplingTrace& tr) {
  w << static_cast<unsigned long long>(tr.seed) << tr.tau_c << to_string(tr.cause)
    << static_cast<unsigned long long>(tr.events);
  w.end_row();
}

}  // namespace jsqstein::coupling
