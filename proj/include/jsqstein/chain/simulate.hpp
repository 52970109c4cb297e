#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "jsqstein/chain/generator.hpp"
#include "jsqstein/chain/state_space.hpp"
#include "jsqstein/util/rng.hpp"

namespace jsqstein::chain {

struct Event {
  double dt = 0.0;
  Transition move;
};

/// One Gillespie step from q: exponential holding time, then a move chosen
/// proportionally to its rate. Empty when q has no outgoing transitions.
inline std::optional<Event> next_event(const ModelParams& p, std::span<const int> q, util::Stream& rng) {
  Transition moves[16];
  std::vector<Transition> spill;
  std::size_t count = 0;
  double total = 0.0;
  for_each_transition(p, q, [&](const Transition& t) {
    if (count < 16)
      moves[count] = t;
    else
      spill.push_back(t);
    ++count;
    total += t.rate;
  });
  if (count == 0) return std::nullopt;
  Event e;
  e.dt = rng.exponential(total);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < count; ++i) {
    const Transition& t = i < 16 ? moves[i] : spill[i - 16];
    e.move = t;
    if (u < t.rate) break;
    u -= t.rate;
  }
  return e;
}

/// Long-run fraction of time spent in each state over `events` jumps.
inline std::vector<double> occupancy_fractions(const StateSpace& space, Occupancy& q, std::size_t events,
                                               util::Stream& rng) {
  std::vector<double> time(space.size(), 0.0);
  double total = 0.0;
  for (std::size_t e = 0; e < events; ++e) {
    auto ev = next_event(space.params(), q, rng);
    if (!ev) break;
    time[space.index(q)] += ev->dt;
    total += ev->dt;
    q[static_cast<std::size_t>(ev->move.level)] += ev->move.step;
  }
  for (double& t : time) t /= total;
  return time;
}

}  // namespace jsqstein::chain
