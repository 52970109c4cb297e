#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace jsqstein::util {

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

template <class Range>
double compensated_sum(const Range& xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

/// Mean and the iid standard error.
inline Estimate mean_stderr(const std::vector<double>& xs) {
  Estimate e;
  e.count = xs.size();
  if (xs.empty()) return e;
  CompensatedSum s;
  for (double x : xs) s.add(x);
  e.mean = s.value() / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    CompensatedSum ss;
    for (double x : xs) ss.add((x - e.mean) * (x - e.mean));
    const double var = ss.value() / static_cast<double>(xs.size() - 1);
    e.se = std::sqrt(var / static_cast<double>(xs.size()));
  }
  return e;
}

/// Batch-means estimate: the series is cut into `batches` contiguous blocks
/// and the standard error comes from the spread of the block means.
inline Estimate batch_means(const std::vector<double>& xs, std::size_t batches = 100) {
  if (batches < 2) throw std::invalid_argument("batch means needs at least two batches");
  if (xs.size() < batches) return mean_stderr(xs);
  const std::size_t per = xs.size() / batches;
  std::vector<double> means;
  means.reserve(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    CompensatedSum s;
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) s.add(xs[i]);
    means.push_back(s.value() / static_cast<double>(per));
  }
  Estimate e = mean_stderr(means);
  e.mean = mean_stderr(xs).mean;
  e.count = xs.size();
  return e;
}

/// Wilson score interval for a binomial proportion at normal quantile z.
inline std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials,
                                                 double z = 1.959963984540054) {
  if (trials == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Two-sample Kolmogorov-Smirnov distance. Ties are handled by stepping
/// both empirical CDFs past each distinct value before comparing.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS distance of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace jsqstein::util
