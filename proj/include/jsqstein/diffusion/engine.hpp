#pragma once

// Euler scheme for the reflected two-dimensional limit
//   dY1 = (beta - Y1 - Y2) dt + sqrt(2) dW + dU,   dY2 = -Y2 dt + dU,
// with U the minimal nondecreasing regulator keeping Y1 >= 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <ostream>
#include <vector>

#include "jsqstein/lattice/grid_function.hpp"
#include "jsqstein/lattice/interpolate.hpp"
#include "jsqstein/util/csv.hpp"
#include "jsqstein/util/rng.hpp"
#include "jsqstein/util/stats.hpp"

namespace jsqstein::diffusion {

struct DiffusionState {
  double y1 = 0.0;
  double y2 = 0.0;
  double u = 0.0;
};

struct StepInfo {
  double du = 0.0;     // regulator increment
  double clamp = 0.0;  // amount added to keep y2 >= 0
};

/// One projected Euler step driven by the standard normal draw g.
inline StepInfo step(DiffusionState& s, double beta, double dt, double g) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double y1 = s.y1 + (beta - s.y1 - s.y2) * dt + std::sqrt(2.0 * dt) * g;
  StepInfo info;
  info.du = std::max(0.0, -y1);
  s.y1 = y1 + info.du;
  double y2 = s.y2 + info.du - s.y2 * dt;
  if (y2 < 0.0) {
    info.clamp = -y2;
    y2 = 0.0;
  }
  s.y2 = y2;
  s.u += info.du;
  if (!std::isfinite(s.y1) || !std::isfinite(s.y2)) throw std::runtime_error("diffusion state became non-finite");
  return info;
}

struct SimConfig {
  double dt = 1e-3;
  double burn_in = 100.0;
  double horizon = 1000.0;
  std::size_t thinning = 100;
  std::uint64_t seed = 1;
  std::size_t paths = 1;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (!(burn_in >= 0.0) || !(horizon >= 0.0)) throw std::invalid_argument("burn_in and horizon must be nonnegative");
    if (thinning == 0) throw std::invalid_argument("thinning must be at least 1");
    if (paths == 0) throw std::invalid_argument("paths must be at least 1");
  }
};

struct PathDiagnostics {
  double min_y1 = 0.0;
  double min_y2 = 0.0;
  double total_u = 0.0;
  double clamp_total = 0.0;
  double off_boundary_du = 0.0;  // sum of du over steps ending with y1 > sqrt(dt)
  bool u_monotone = true;
  // max over steps of U - (sup(-sqrt2 W)^+ + int (y1 + y2) ds); at most round-off
  double regulator_excess = -std::numeric_limits<double>::infinity();
  std::size_t steps = 0;
};

struct SampleSet {
  std::vector<double> y1;
  std::vector<double> y2;
  std::vector<std::size_t> path_begin;  // offsets of each path's samples, plus the end
  std::vector<PathDiagnostics> diagnostics;

  std::size_t size() const { return y1.size(); }
  std::size_t paths() const { return path_begin.empty() ? 0 : path_begin.size() - 1; }
};

namespace detail {

inline std::size_t steps_for(double time, double dt) {
  return static_cast<std::size_t>(std::llround(time / dt));
}

}  // namespace detail

/// Simulates one path from `start` and appends every `thinning`-th post-burn-in state.
inline PathDiagnostics simulate_path(double beta, const SimConfig& cfg, std::uint64_t path_seed,
                                     DiffusionState start, std::vector<double>& y1, std::vector<double>& y2) {
  util::Stream rng(path_seed);
  DiffusionState s = start;
  PathDiagnostics d;
  d.min_y1 = s.y1;
  d.min_y2 = s.y2;
  const std::size_t burn = detail::steps_for(cfg.burn_in, cfg.dt);
  const std::size_t keep = detail::steps_for(cfg.horizon, cfg.dt);
  const double thresh = std::sqrt(cfg.dt);
  const double sd = std::sqrt(2.0 * cfg.dt);
  double w = 0.0, w_sup = 0.0, integral = 0.0;
  for (std::size_t k = 1; k <= burn + keep; ++k) {
    const double u_before = s.u;
    const double g = rng.normal();
    integral += (s.y1 + s.y2) * cfg.dt;
    const StepInfo info = step(s, beta, cfg.dt, g);
    w += sd * g;
    w_sup = std::max(w_sup, -w);
    d.regulator_excess = std::max(d.regulator_excess, s.u - start.u - (w_sup + integral));
    d.clamp_total += info.clamp;
    if (s.y1 > thresh) d.off_boundary_du += info.du;
    if (s.u < u_before) d.u_monotone = false;
    d.min_y1 = std::min(d.min_y1, s.y1);
    d.min_y2 = std::min(d.min_y2, s.y2);
    if (k > burn && (k - burn) % cfg.thinning == 0) {
      y1.push_back(s.y1);
      y2.push_back(s.y2);
    }
  }
  d.total_u = s.u;
  d.steps = burn + keep;
  return d;
}

/// Thinned post-burn-in samples from cfg.paths independent paths started at (beta, 0).
/// Path k draws from the stream derive_seed(cfg.seed, k).
inline SampleSet stationary_sample(double beta, const SimConfig& cfg) {
  cfg.validate();
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  SampleSet out;
  const std::size_t per = detail::steps_for(cfg.horizon, cfg.dt) / cfg.thinning;
  out.y1.reserve(per * cfg.paths);
  out.y2.reserve(per * cfg.paths);
  out.path_begin.push_back(0);
  for (std::size_t k = 0; k < cfg.paths; ++k) {
    out.diagnostics.push_back(
        simulate_path(beta, cfg, util::derive_seed(cfg.seed, k), {beta, 0.0, 0.0}, out.y1, out.y2));
    out.path_begin.push_back(out.y1.size());
  }
  return out;
}

/// Mean of fn(y1, y2) over the samples. The standard error treats path means
/// as independent replicates when there are several paths and falls back to
/// 100 batch means along a single path.
template <class Fn>
util::Estimate sample_mean(const SampleSet& s, Fn&& fn) {
  std::vector<double> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v[i] = fn(s.y1[i], s.y2[i]);
  util::Estimate e;
  if (s.paths() >= 2) {
    std::vector<double> means;
    for (std::size_t p = 0; p < s.paths(); ++p) {
      util::CompensatedSum acc;
      for (std::size_t i = s.path_begin[p]; i < s.path_begin[p + 1]; ++i) acc.add(v[i]);
      const std::size_t cnt = s.path_begin[p + 1] - s.path_begin[p];
      if (cnt) means.push_back(acc.value() / static_cast<double>(cnt));
    }
    e = util::mean_stderr(means);
    e.mean = util::mean_stderr(v).mean;
    e.count = v.size();
  } else {
    e = util::batch_means(v, 100);
  }
  return e;
}

/// (beta - x1 - x2) d1 f - x2 d2 f + d11 f from the three partial derivatives.
inline double apply_gy(double beta, double x1, double x2, double d1, double d2, double d11) {
  return (beta - x1 - x2) * d1 - x2 * d2 + d11;
}

/// G_Y applied to any f exposing derivative(x, {a1, a2}).
template <class F>
double apply_gy(const F& f, double beta, double x1, double x2) {
  return apply_gy(beta, x1, x2, f.derivative(x1, x2, 1, 0), f.derivative(x1, x2, 0, 1),
                  f.derivative(x1, x2, 2, 0));
}

/// Lattice function on the box [0, K]^2 with K covering max(y) plus the stencil
/// width, filled with fn(x1, x2) at the scaled lattice points.
template <class Fn>
lattice::GridFunction<2> grid_covering(const SampleSet& s, double delta, Fn&& fn) {
  double top = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) top = std::max({top, s.y1[i], s.y2[i]});
  const auto K = static_cast<std::int64_t>(std::floor(top / delta)) + 5;
  return lattice::GridFunction<2>::tabulate(delta, {0, 0}, {K, K}, [&](const lattice::Index<2>& k) {
    return fn(delta * static_cast<double>(k[0]), delta * static_cast<double>(k[1]));
  });
}

/// Monte Carlo estimate of E A h(Y1, Y2) with its standard error. Throws
/// StencilError if a sample lies outside the interpolation domain of h.
template <lattice::LatticeFunction<2> H>
util::Estimate expected_interp(const H& h, const SampleSet& s) {
  return sample_mean(s, [&](double y1, double y2) { return lattice::interp_eval<2>(h, {y1, y2}); });
}

/// G_Y (A f)(x) from the interpolant's derivatives.
template <lattice::LatticeFunction<2> F>
double apply_gy_interp(const F& f, double beta, double x1, double x2) {
  const lattice::Point<2> x{x1, x2};
  return apply_gy(beta, x1, x2, lattice::interp_derivative<2>(f, x, {1, 0}),
                  lattice::interp_derivative<2>(f, x, {0, 1}), lattice::interp_derivative<2>(f, x, {2, 0}));
}

inline void write_samples(std::ostream& os, const SampleSet& s) {
  util::CsvWriter w(os, {"sample_id", "y1", "y2"});
  for (std::size_t i = 0; i < s.size(); ++i) {
    w << static_cast<unsigned long long>(i) << s.y1[i] << s.y2[i];
    w.end_row();
  }
}

}  // namespace jsqstein::diffusion
