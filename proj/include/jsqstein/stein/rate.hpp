#pragma once

// Distance between the stationary JSQ law and the diffusion limit, measured
// through E h(X) - E A h(Y1, Y2, 0, ...) and through a family of smooth functions.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "jsqstein/chain/analysis.hpp"
#include "jsqstein/diffusion/engine.hpp"
#include "jsqstein/stein/instance.hpp"
#include "jsqstein/util/csv.hpp"
#include "jsqstein/util/parallel.hpp"
#include "jsqstein/util/stats.hpp"

namespace jsqstein::stein {

struct RateRow {
  ModelParams params;
  TestFunction h = TestFunction::Sum;
  double exact_mean = 0.0;  // E h(X)
  util::Estimate diffusion_mean;  // E A h(Y1, Y2, 0, ...)
  double error = 0.0;
  double stderr_ = 0.0;
  double sqrt_n_error = 0.0;
  bool inconclusive = false;  // MC stderr above half the error
  std::uint64_t seed = 0;
};

/// One grid instance: exact E h(X) from pi, E A h(Y) from cfg.paths diffusion
/// paths seeded by instance_seed(master, params).
inline RateRow rate_row(const ModelParams& p, TestFunction h, diffusion::SimConfig cfg, std::uint64_t master) {
  p.validate();
  RateRow row;
  row.params = p;
  row.h = h;
  row.seed = instance_seed(master, p);
  if (h == TestFunction::Constant) {
    // A c = c and pi sums to one, so both sides equal the constant.
    row.exact_mean = 1.0;
    row.diffusion_mean = {1.0, 0.0, 0};
    return row;
  }
  chain::StateSpace space(p);
  chain::RateMatrix G(p, space);
  const auto pi = chain::stationary(G);
  row.exact_mean = chain::expectation(pi, chain::tabulate_test_function(space, h));
  cfg.seed = row.seed;
  const auto samples = diffusion::stationary_sample(p.beta, cfg);
  std::vector<double> x(space.levels(), 0.0);
  const auto grid = diffusion::grid_covering(samples, p.delta(), [&](double x1, double x2) {
    x[0] = x1;
    x[1] = x2;
    return chain::evaluate_test_function(h, x, p.beta);
  });
  row.diffusion_mean = diffusion::expected_interp(grid, samples);
  row.error = std::abs(row.exact_mean - row.diffusion_mean.mean);
  row.stderr_ = row.diffusion_mean.se;
  row.sqrt_n_error = std::sqrt(static_cast<double>(p.n)) * row.error;
  row.inconclusive = row.stderr_ > 0.5 * row.error;
  return row;
}

inline std::vector<RateRow> rate_experiment(const std::vector<ModelParams>& grid, TestFunction h,
                                            const diffusion::SimConfig& cfg, std::uint64_t master,
                                            std::size_t threads = 1) {
  std::vector<RateRow> rows(grid.size());
  util::parallel_for(grid.size(), threads, [&](std::size_t i) {
    try {
      rows[i] = rate_row(grid[i], h, cfg, master);
    } catch (const std::exception& e) {
      throw std::runtime_error("rate instance n=" + std::to_string(grid[i].n) + " b=" + std::to_string(grid[i].b) +
                               " beta=" + util::format_double(grid[i].beta) + ": " + e.what());
    }
  });
  return rows;
}

inline std::vector<std::string> rate_header() { return {"n", "b", "beta", "h", "error", "stderr", "sqrt_n_error"}; }

inline void append_rate_rows(util::CsvWriter& w, const std::vector<RateRow>& rows) {
  for (const auto& r : rows) {
    w << r.params.n << r.params.b << r.params.beta << chain::to_string(r.h) << r.error << r.stderr_ << r.sqrt_n_error;
    w.end_row();
  }
}

struct SmoothFunction {
  std::string name;
  std::function<double(double, double)> fn;
};

/// (x1 + x2)/2, tanh(x1)/2, tanh(x2)/2, tanh((x1 + x2)/2)/2: first partials at most 1.
inline std::vector<SmoothFunction> default_smooth_family() {
  return {{"half_sum", [](double a, double b) { return (a + b) / 2; }},
          {"tanh_x1", [](double a, double) { return std::tanh(a) / 2; }},
          {"tanh_x2", [](double, double b) { return std::tanh(b) / 2; }},
          {"tanh_half_sum", [](double a, double b) { return std::tanh((a + b) / 2) / 2; }}};
}

struct SmoothDistance {
  double estimate = 0.0;  // max over the family of |E h(X) - E h(Y)|
  double stderr_ = 0.0;   // MC stderr of the maximizing member
  std::string argmax;
};

/// Lower bound on the smooth-function distance between X (first two scaled
/// coordinates under pi) and the diffusion samples.
inline SmoothDistance smooth_distance_estimate(const chain::StateSpace& space, std::span<const double> pi,
                                               const std::vector<SmoothFunction>& family,
                                               const diffusion::SampleSet& samples) {
  SmoothDistance out;
  for (const auto& member : family) {
    util::CompensatedSum ex;
    for (std::size_t id = 0; id < space.size(); ++id) {
      const auto x = space.scaled(space.state(id));
      ex.add(pi[id] * member.fn(x[0], x.size() > 1 ? x[1] : 0.0));
    }
    const auto ey = diffusion::sample_mean(samples, member.fn);
    const double gap = std::abs(ex.value() - ey.mean);
    if (gap > out.estimate || out.argmax.empty()) {
      out.estimate = gap;
      out.stderr_ = ey.se;
      out.argmax = member.name;
    }
  }
  return out;
}

}  // namespace jsqstein::stein
