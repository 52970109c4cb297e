#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace jsqstein::chain {

/// Finite-buffer JSQ instance: n servers, buffer length b, slack beta.
struct ModelParams {
  int n = 0;
  int b = 1;
  double beta = 1.0;

  double lambda() const { return 1.0 - beta / std::sqrt(static_cast<double>(n)); }
  double delta() const { return 1.0 / std::sqrt(static_cast<double>(n)); }
  double arrival_rate() const { return static_cast<double>(n) * lambda(); }
  int levels() const { return b + 1; }

  void validate() const {
    if (n < 1) throw std::invalid_argument("n must be a positive integer");
    if (b < 1) throw std::invalid_argument("b must be at least 1");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
    if (!(beta < std::sqrt(static_cast<double>(n)))) {
      throw std::invalid_argument("beta must be below sqrt(n) so that lambda lies in (0,1); got n=" +
                                  std::to_string(n) + ", beta=" + std::to_string(beta));
    }
  }

  bool operator==(const ModelParams&) const = default;
};

}  // namespace jsqstein::chain
