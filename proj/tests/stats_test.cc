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

#include "fpplab/stats.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace fpplab {
namespace {

TEST(CompensatedSum, RecoversCancelledTerms) {
  const std::vector<double> xs = {1e100, 1.0, -1e100};
  EXPECT_EQ(sum(xs), 1.0);
  std::vector<double> tenths(10, 0.1);
  EXPECT_EQ(sum(tenths), 1.0);
}

TEST(Moments, SmallSample) {
  const std::vector<double> xs = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(mean(xs), 2.5);
  EXPECT_DOUBLE_EQ(sample_variance(xs), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(population_variance(xs), 1.25);
  const auto s = summarize(xs);
  EXPECT_DOUBLE_EQ(s.stderr_mean, std::sqrt(5.0 / 12.0));
}

TEST(Moments, TwoPointFourthNorm) {
  // 15 zeros and one 4: ||X||_4 = (256/16)^(1/4) = 2.
  std::vector<double> xs(16, 0.0);
  xs[7] = 4.0;
  EXPECT_DOUBLE_EQ(lp_norm(xs, 4.0), 2.0);
  EXPECT_DOUBLE_EQ(population_variance(xs), 0.9375);
}

TEST(Correlation, PerfectAndIndependent) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {3, 5, 7, 9, 11};
  EXPECT_NEAR(correlation(x, y), 1.0, 1e-15);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> a, b;
  for (int i = 0; i < 20000; ++i) {
    a.push_back(g(rng));
    b.push_back(g(rng));
  }
  const double r = correlation(a, b);
  EXPECT_LT(std::abs(r), 4 * correlation_stderr(r, a.size()));
}

TEST(LinearFit, ExactLine) {
  const std::vector<double> x = {0, 1, 2, 3};
  const std::vector<double> y = {2, 5, 8, 11};
  const auto f = linear_fit(x, y);
  EXPECT_DOUBLE_EQ(f.slope, 3.0);
  EXPECT_DOUBLE_EQ(f.intercept, 2.0);
  EXPECT_DOUBLE_EQ(f.r_squared, 1.0);
  EXPECT_NEAR(f.slope_stderr, 0.0, 1e-12);
}

TEST(LinearFit, WeightedMatchesNormalEquations) {
  // Frozen from an independent numpy solve of (X'WX) b = X'Wy.
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {2.1, 3.9, 6.2, 7.8, 10.1};
  const std::vector<double> w = {1, 2, 1, 0.5, 3};
  const auto f = linear_fit(x, y, w);
  EXPECT_NEAR(f.intercept, -0.035471698113212685, 1e-12);
  EXPECT_NEAR(f.slope, 2.0226415094339636, 1e-12);
  EXPECT_NEAR(f.slope_stderr, 0.043207135204429745, 1e-12);
  EXPECT_NEAR(f.intercept_stderr, 0.15855703907005037, 1e-12);
  EXPECT_NEAR(f.r_squared, 0.9986329001460951, 1e-12);
}

TEST(LinearFit, RejectsDegenerateInput) {
  const std::vector<double> x = {1, 1, 1};
  const std::vector<double> y = {1, 2, 3};
  EXPECT_THROW(linear_fit(x, y), std::invalid_argument);
  EXPECT_THROW(linear_fit(std::vector<double>{1}, std::vector<double>{1}),
               std::invalid_argument);
}

TEST(LogLogFit, PowerLawRecovered) {
  for (double p : {0.25, 0.5, 0.75}) {
    std::vector<double> n, v, se;
    for (double s = 16; s <= 512; s *= 2) {
      n.push_back(s);
      v.push_back(3.0 * std::pow(s, p));
      se.push_back(0.01 * v.back());
    }
    EXPECT_NEAR(log_log_fit(n, v, se).slope, p, 1e-12);
    EXPECT_NEAR(log_log_fit(n, v).slope, p, 1e-12);
  }
}

TEST(Bootstrap, IndexDeterministicAndInRange) {
  for (std::size_t i = 0; i < 1000; ++i) {
    const std::size_t k = bootstrap_index(9, 3, i, 17);
    EXPECT_LT(k, 17u);
    EXPECT_EQ(k, bootstrap_index(9, 3, i, 17));
  }
  EXPECT_NE(bootstrap_index(9, 3, 0, 1u << 30), bootstrap_index(9, 4, 0, 1u << 30));
}

TEST(Bootstrap, MeanStderrMatchesClosedForm) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 2.0);
  std::vector<double> xs;
  for (int i = 0; i < 2000; ++i) xs.push_back(g(rng));
  const double boot = bootstrap_stderr(
      xs, [](std::span<const double> s) { return mean(s); }, 42);
  const double closed = std::sqrt(sample_variance(xs) / xs.size());
  EXPECT_NEAR(boot / closed, 1.0, 0.15);
  EXPECT_EQ(boot, bootstrap_stderr(xs, [](std::span<const double> s) { return mean(s); }, 42));
}

TEST(VarianceStderr, GaussianClosedForm) {
  // For Gaussian samples the stderr of s^2 is about sigma^2 sqrt(2/(n-1)).
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> xs;
  for (int i = 0; i < 20000; ++i) xs.push_back(g(rng));
  EXPECT_NEAR(variance_stderr(xs) / std::sqrt(2.0 / 19999.0), 1.0, 0.05);
}

TEST(KolmogorovSmirnov, CriticalValuesAndStatistics) {
  EXPECT_NEAR(ks_critical_value(0.001, 100000), 0.006164779987778185, 1e-15);
  EXPECT_NEAR(ks_two_sample_critical_value(0.01, 500, 500), 0.1029399569316797, 1e-15);
  const std::vector<double> a = {0.1, 0.5, 0.9, 1.3};
  const std::vector<double> b = {0.2, 0.4, 1.0, 1.1, 1.5};
  EXPECT_NEAR(ks_two_sample_statistic(a, b), 0.35, 1e-15);  // scipy ks_2samp
  EXPECT_EQ(ks_two_sample_statistic(a, a), 0.0);
  EXPECT_EQ(ks_two_sample_statistic(std::vector<double>{0, 1}, std::vector<double>{2, 3}), 1.0);
  const std::vector<double> grid = {0.125, 0.375, 0.625, 0.875};
  EXPECT_DOUBLE_EQ(ks_statistic(grid, [](double x) { return x; }), 0.125);
}

}  // namespace
}  // namespace fpplab
