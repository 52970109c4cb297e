#pragma once

// Synchronous coupling of two JSQ systems that differ by one low-priority
// customer. The joint state is the base occupancy q together with the class i
// of the extra customer: it sits at a server holding i customers in the
// shadow system, which is therefore q + e_i.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include "jsqstein/chain/generator.hpp"
#include "jsqstein/chain/model.hpp"
#include "jsqstein/chain/state_space.hpp"
#include "jsqstein/util/rng.hpp"

namespace jsqstein::coupling {

using chain::ModelParams;
using chain::Occupancy;

inline constexpr int kCoupled = 0;

enum class CouplingCause { None, ServiceInTheta1, BlockingAtFull };

inline const char* to_string(CouplingCause c) {
  switch (c) {
    case CouplingCause::ServiceInTheta1: return "service-completion-in-theta1";
    case CouplingCause::BlockingAtFull: return "blocking-at-full";
    case CouplingCause::None: return "none";
  }
  return "none";
}

struct JointState {
  Occupancy base;
  int extra_level = kCoupled;  // 1..b+1, or kCoupled

  bool coupled() const { return extra_level == kCoupled; }

  Occupancy shadow() const {
    Occupancy s = base;
    if (!coupled()) s[static_cast<std::size_t>(extra_level - 1)] += 1;
    return s;
  }
};

/// (q, q + e_i) is in class i when q_i < n and the shadow is a valid state.
inline bool valid_class(const ModelParams& p, std::span<const int> q, int i) {
  if (i < 1 || i > static_cast<int>(q.size())) return false;
  const auto j = static_cast<std::size_t>(i - 1);
  if (q[j] >= p.n) return false;
  if (j > 0 && q[j - 1] <= q[j]) return false;
  return true;
}

struct JointMove {
  int level = 0;       // 0-based level of q that changes
  int step = 0;        // +1 / -1, 0 for no change of q
  int next_class = 0;  // class after the move
  CouplingCause cause = CouplingCause::None;
  double rate = 0.0;
};

/// Outgoing moves of the joint chain from (q, i), i >= 1.
template <class Fn>
void for_each_joint_move(const ModelParams& p, std::span<const int> q, int i, Fn&& fn) {
  const int m = static_cast<int>(q.size());
  const double nl = p.arrival_rate();
  for (int j = 0; j < m; ++j) {
    if (q[j] < p.n) {
      int next = i;
      CouplingCause cause = CouplingCause::None;
      if (j == i - 1 && q[j] == p.n - 1) {
        if (i == m) {
          next = kCoupled;
          cause = CouplingCause::BlockingAtFull;
        } else {
          next = i + 1;
        }
      }
      fn(JointMove{j, +1, next, cause, nl});
      break;
    }
  }
  if (i == 1) fn(JointMove{0, 0, kCoupled, CouplingCause::ServiceInTheta1, 1.0});
  for (int j = 0; j < m; ++j) {
    const int nxt = j + 1 < m ? q[j + 1] : 0;
    int r = q[j] - nxt;
    if (i >= 2 && j == i - 2) {
      fn(JointMove{j, -1, i - 1, CouplingCause::None, 1.0});
      r -= 1;
    }
    if (r > 0) fn(JointMove{j, -1, i, CouplingCause::None, static_cast<double>(r)});
  }
}

struct CouplingTrace {
  double tau_c = 0.0;
  CouplingCause cause = CouplingCause::None;
  std::uint64_t events = 0;
  std::uint64_t seed = 0;
  double theta1_time = 0.0;  // time spent in class 1 before coupling
  std::uint64_t class_changes = 0;
};

/// Advances (state, t) by one joint event. Returns false if the horizon is
/// reached first (state unchanged, t set to the horizon).
inline bool joint_step(const ModelParams& p, JointState& s, double& t, double horizon, util::Stream& rng,
                       CouplingCause* cause = nullptr) {
  JointMove moves[32];
  std::size_t count = 0;
  double total = 0.0;
  auto push = [&](const JointMove& mv) {
    if (count >= 32) throw std::length_error("too many joint moves");
    moves[count++] = mv;
    total += mv.rate;
  };
  if (s.coupled()) {
    chain::for_each_transition(p, s.base, [&](const chain::Transition& tr) {
      push(JointMove{tr.level, tr.step, kCoupled, CouplingCause::None, tr.rate});
    });
  } else {
    for_each_joint_move(p, s.base, s.extra_level, push);
  }
  if (count == 0 || total <= 0.0) {
    t = horizon;
    return false;
  }
  const double dt = rng.exponential(total);
  if (t + dt > horizon) {
    t = horizon;
    return false;
  }
  t += dt;
  double u = rng.uniform() * total;
  std::size_t k = 0;
  for (; k + 1 < count; ++k) {
    if (u < moves[k].rate) break;
    u -= moves[k].rate;
  }
  const JointMove& mv = moves[k];
  s.base[static_cast<std::size_t>(mv.level)] += mv.step;
  s.extra_level = mv.next_class;
  if (cause) *cause = mv.cause;
  return true;
}

/// Runs the joint chain from (q0, i0) until the two systems merge.
inline CouplingTrace simulate_coupled(const ModelParams& p, const Occupancy& q0, int i0, std::uint64_t seed,
                                      std::uint64_t max_events = 1'000'000'000ULL) {
  p.validate();
  if (q0.size() != static_cast<std::size_t>(p.levels())) throw std::invalid_argument("state has the wrong length");
  if (!valid_class(p, q0, i0)) {
    throw std::invalid_argument("initial pair is not in class " + std::to_string(i0));
  }
  util::Stream rng(seed);
  CouplingTrace tr;
  tr.seed = seed;
  JointState s{q0, i0};
  double t = 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  while (!s.coupled()) {
    if (tr.events >= max_events) throw std::runtime_error("coupling did not occur within the event budget");
    const int before = s.extra_level;
    const double t0 = t;
    CouplingCause cause = CouplingCause::None;
    joint_step(p, s, t, inf, rng, &cause);
    if (before == 1) tr.theta1_time += t - t0;
    if (s.extra_level != before) ++tr.class_changes;
    ++tr.events;
    if (s.coupled()) tr.cause = cause;
  }
  tr.tau_c = t;
  return tr;
}

/// Shadow-system occupancy at time `horizon` under the coupling.
inline Occupancy coupled_shadow_at(const ModelParams& p, const Occupancy& q0, int i0, double horizon,
                                   util::Stream& rng) {
  if (!valid_class(p, q0, i0)) throw std::invalid_argument("initial pair is not in class " + std::to_string(i0));
  JointState s{q0, i0};
  double t = 0.0;
  while (joint_step(p, s, t, horizon, rng)) {
  }
  return s.shadow();
}

/// Plain JSQ occupancy at time `horizon`.
inline Occupancy direct_at(const ModelParams& p, Occupancy q, double horizon, util::Stream& rng) {
  JointState s{std::move(q), kCoupled};
  double t = 0.0;
  while (joint_step(p, s, t, horizon, rng)) {
  }
  return s.base;
}

}  // namespace jsqstein::coupling
