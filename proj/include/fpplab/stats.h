// Copyright 2026 The fpplab Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small statistics toolkit. Every reduction runs in input order with
// compensated summation, so results depend only on the sample sequence.

#ifndef FPPLAB_STATS_H_
#define FPPLAB_STATS_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fpplab {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double sum(std::span<const double> xs);
double mean(std::span<const double> xs);
// Unbiased (n - 1) variance; 0 for fewer than two samples.
double sample_variance(std::span<const double> xs);
// Plug-in (n) variance.
double population_variance(std::span<const double> xs);
// (mean |x|^p)^(1/p).
double lp_norm(std::span<const double> xs, double p);
double covariance(std::span<const double> xs, std::span<const double> ys);
double correlation(std::span<const double> xs, std::span<const double> ys);
// Large-sample standard error sqrt((1 - r^2) / (n - 2)).
double correlation_stderr(double r, std::size_t n);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double stderr_mean = 0.0;
};
Summary summarize(std::span<const double> xs);

// Standard error of the unbiased sample variance, estimated from the fourth
// central moment: sqrt((m4 - s^4 (n-3)/(n-1)) / n).
double variance_stderr(std::span<const double> xs);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

// Least squares y = a + b x. Empty weights means ordinary least squares.
// Throws std::invalid_argument on size mismatch or fewer than two distinct x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> weights = {});

// Fit of log(value) against log(scale). When every stderr is positive the
// fit is weighted by (value / stderr)^2, the inverse variance of log(value)
// by the delta method; otherwise unweighted. Values must be positive.
LinearFit log_log_fit(std::span<const double> scale, std::span<const double> value,
                      std::span<const double> stderr_value = {});

// Deterministic resampling: index of draw `i` in resample `r` of n items.
std::size_t bootstrap_index(std::uint64_t seed, std::size_t r, std::size_t i,
                            std::size_t n);

inline constexpr int kDefaultBootstrapResamples = 200;

// Standard deviation across resamples of `statistic` evaluated on resampled
// copies of `xs`.
double bootstrap_stderr(std::span<const double> xs,
                        const std::function<double(std::span<const double>)>& statistic,
                        std::uint64_t seed, int resamples = kDefaultBootstrapResamples);

// Two-sided one-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::span<const double> xs, const std::function<double(double)>& cdf);
double ks_two_sample_statistic(std::span<const double> xs, std::span<const double> ys);
// Asymptotic critical values sqrt(-ln(alpha/2)/2) scaled by 1/sqrt(n) and by
// sqrt((n+m)/(n m)) respectively.
double ks_critical_value(double alpha, std::size_t n);
double ks_two_sample_critical_value(double alpha, std::size_t n, std::size_t m);

}  // namespace fpplab

#endif  // FPPLAB_STATS_H_
