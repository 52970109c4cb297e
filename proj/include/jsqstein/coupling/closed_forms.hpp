#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "jsqstein/chain/model.hpp"

namespace jsqstein::coupling {

/// Expected time for Q_1 to climb from q1 to q1 + 1 with empty buffers:
/// (q1! / (n lambda)^{q1+1}) sum_{k=0}^{q1} (n lambda)^k / k!.
inline double hitting_time_up(const chain::ModelParams& p, int q1) {
  p.validate();
  if (q1 < 0 || q1 >= p.n) throw std::domain_error("hitting_time_up needs 0 <= q1 <= n-1");
  const double a = p.arrival_rate();
  const double la = std::log(a);
  const double lf = std::lgamma(q1 + 1.0);
  double s = 0.0;
  // Largest terms are at k near q1; summing upward keeps the small ones first.
  for (int k = 0; k <= q1; ++k) s += std::exp(lf - std::lgamma(k + 1.0) + (k - q1 - 1) * la);
  return s;
}

struct RuinParams {
  double p = 0.5;  // probability of winning a play
  double q = 0.5;  // probability of losing a play
  int z = 1;       // initial wealth
  int a = 2;       // target wealth
  double r = 1.0;  // plays per unit time

  void validate() const {
    if (!(p > 0 && p < 1 && q > 0 && q < 1) || std::abs(p + q - 1.0) > 1e-12)
      throw std::invalid_argument("ruin probabilities must lie in (0,1) and sum to 1");
    if (!(0 < z && z < a)) throw std::invalid_argument("ruin wealth must satisfy 0 < z < a");
    if (!(r > 0)) throw std::invalid_argument("play rate must be positive");
  }
};

/// E s^{D_z} for the duration D_z of the discrete game, evaluated in the
/// log domain: with lambda_{1,2}(s) = (1 +- sqrt(1 - 4 p q s^2)) / (2 p s) and rho = lambda_2 / lambda_1,
/// E s^{D_z} = lambda_2^z (1 - rho^{a-z}) / (1 - rho^a) + lambda_1^{z-a} (1 - rho^z) / (1 - rho^a).
inline double ruin_duration_mgf(const RuinParams& rp, double s) {
  rp.validate();
  if (!(s > 0 && s < 1)) throw std::domain_error("generating function argument must lie in (0,1)");
  const double disc = std::sqrt(1.0 - 4.0 * rp.p * rp.q * s * s);
  const double l1 = (1.0 + disc) / (2.0 * rp.p * s);
  // Stable form of (1 - disc) / (2 p s).
  const double l2 = (2.0 * rp.q * s) / (1.0 + disc);
  const double lr = std::log(l2) - std::log(l1);  // log rho < 0
  const double z = rp.z, a = rp.a;
  auto one_minus_rho_pow = [&](double e) { return -std::expm1(e * lr); };
  const double denom = one_minus_rho_pow(a);
  const double ruin = std::exp(z * std::log(l2)) * one_minus_rho_pow(a - z) / denom;
  const double win = std::exp((z - a) * std::log(l1)) * one_minus_rho_pow(z) / denom;
  return ruin + win;
}

/// E exp(-duration) of the continuous game whose plays arrive at rate r.
inline double ruin_duration_laplace(const RuinParams& rp) { return ruin_duration_mgf(rp, rp.r / (rp.r + 1.0)); }

/// Probability of hitting 0 before a from z.
inline double ruin_probability(double p, double q, int z, int a) {
  if (!(0 < z && z < a)) throw std::invalid_argument("ruin wealth must satisfy 0 < z < a");
  if (!(p > 0 && q > 0)) throw std::invalid_argument("ruin probabilities must be positive");
  if (std::abs(p - q) < 1e-15) return 1.0 - static_cast<double>(z) / a;
  const double lr = std::log(q / p);
  // 1 - (1 - r^z) / (1 - r^a) with r = q / p.
  return 1.0 - std::expm1(z * lr) / std::expm1(a * lr);
}

struct HalfinWhittGame {
  int q2 = 0;
  int cls = 1;
  RuinParams game;
  double laplace = 0.0;
};

/// Games of the Halfin-Whitt sequence indexed by q_2 in [0, min(2 floor(gamma sqrt n), n)] and
/// class i in 1..b+1, keeping those with q^{(B,i)} - z > 0.
inline std::vector<HalfinWhittGame> halfin_whitt_games(const chain::ModelParams& p, double gamma,
                                                       int q2_stride = 1) {
  p.validate();
  const double rn = std::sqrt(static_cast<double>(p.n));
  const int z = static_cast<int>(std::floor(rn * p.beta / 2.0));
  const int a = z + z / (p.b + 1);
  std::vector<HalfinWhittGame> out;
  if (z < 1 || a <= z) return out;
  const int q2max = std::min(2 * static_cast<int>(std::floor(gamma * rn)), p.n);
  const double nl = p.arrival_rate();
  for (int q2 = 0; q2 <= q2max; q2 += std::max(1, q2_stride)) {
    for (int i = 1; i <= p.b + 1; ++i) {
      const double qb = p.n - q2 - 1 - z + std::floor(static_cast<double>(z) * (i - 1) / (p.b + 1));
      const double down = qb - z;
      if (!(down > 0)) continue;
      HalfinWhittGame g;
      g.q2 = q2;
      g.cls = i;
      g.game = {nl / (nl + down), down / (nl + down), z, a, nl + down};
      g.laplace = ruin_duration_laplace(g.game);
      out.push_back(g);
    }
  }
  return out;
}

/// sup over the sequence's games of E exp(-duration); 0 when no game is admissible.
inline double halfin_whitt_sup_laplace(const chain::ModelParams& p, double gamma) {
  double sup = 0.0;
  for (const auto& g : halfin_whitt_games(p, gamma)) sup = std::max(sup, g.laplace);
  return sup;
}

inline double paper_gamma(double beta) { return 2.0 * (17.0 / beta + beta + 1.0); }

}  // namespace jsqstein::coupling
