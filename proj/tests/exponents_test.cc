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

#include "fpplab/exponents.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fpplab/errors.h"
#include "fpplab/stats.h"

namespace fpplab {
namespace {

const std::vector<int> kGrid = {16, 32, 64, 128, 256};

ExponentEstimate exact(double value, double se = 0.0) {
  ExponentEstimate e;
  e.value = value;
  e.std_error = se;
  return e;
}

TEST(Fits, SyntheticVarianceGivesChi) {
  const auto s = synthetic_power_law_samples(kGrid, 0.5, SyntheticKind::kVariance, 400, 0.0, 1);
  const auto est = fit_chi(kGrid, s, 1);
  EXPECT_NEAR(est.value, 0.25, 0.01);
  EXPECT_NEAR(est.value, 0.25, 1e-9);
  EXPECT_FALSE(est.finite_size_warning);
  EXPECT_EQ(est.window_lo, 16);
  EXPECT_EQ(est.window_hi, 256);
}

TEST(Fits, SyntheticMeanGivesXi) {
  const auto s =
      synthetic_power_law_samples(kGrid, 2.0 / 3.0, SyntheticKind::kMean, 400, 0.0, 2, 0.7);
  const auto est = fit_xi(kGrid, s, 2);
  EXPECT_NEAR(est.value, 0.667, 0.01);
  EXPECT_GT(est.std_error, 0.0);
}

TEST(Fits, NoiselessRecovery) {
  for (double p : {0.25, 0.5, 0.75}) {
    const auto v = synthetic_power_law_samples(kGrid, 2 * p, SyntheticKind::kVariance, 300, 0.0, 3);
    EXPECT_NEAR(fit_chi(kGrid, v, 3).value, p, 0.02);
    const auto m = synthetic_power_law_samples(kGrid, p, SyntheticKind::kMean, 300, 0.0, 4);
    EXPECT_NEAR(fit_xi(kGrid, m, 4).value, p, 0.02);
  }
}

TEST(Fits, NoisyRecoveryWithinThreeStandardErrors) {
  // 10% multiplicative noise per n; the residual-scaled error has few
  // degrees of freedom, so allow a small number of misses.
  const std::vector<int> grid = {8, 12, 16, 24, 32, 48, 64, 96};
  for (double p : {0.25, 0.5, 0.75}) {
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto s = synthetic_power_law_samples(grid, p, SyntheticKind::kMean, 200, 0.1, seed);
      const auto est = fit_xi(grid, s, seed);
      hits += std::abs(est.value - p) <= 3.0 * est.std_error;
    }
    EXPECT_GE(hits, 18) << "p=" << p;
  }
}

TEST(Fits, ReducedWindowFlagsCurvature) {
  // Variance n plus a large constant: the log-log slope drifts with n.
  auto s = synthetic_power_law_samples(kGrid, 1.0, SyntheticKind::kVariance, 20000, 0.0, 5);
  for (std::size_t i = 0; i < kGrid.size(); ++i) {
    const double target = kGrid[i] + 200.0;
    const double k = std::sqrt(target / sample_variance(s[i]));
    for (double& x : s[i]) x *= k;
  }
  const auto est = fit_chi(kGrid, s, 5);
  EXPECT_TRUE(est.finite_size_warning);
  EXPECT_FALSE(est.warnings.empty());
}

TEST(Fits, TableOnlyFit) {
  const std::vector<double> stat = {2.0, 4.0, 8.0, 16.0, 32.0};
  const auto est = fit_exponent_table(ExponentFlavor::kChiVariance, kGrid, stat, {}, {});
  EXPECT_NEAR(est.value, 0.5, 1e-12);
  EXPECT_NEAR(est.reduced_window_value, 0.5, 1e-12);
  EXPECT_FALSE(est.out_of_range);
  const auto big = fit_exponent_table(ExponentFlavor::kXiMean, {2, 4}, {1.0, 8.0}, {}, {});
  EXPECT_NEAR(big.value, 3.0, 1e-12);
  EXPECT_TRUE(big.out_of_range);
  EXPECT_TRUE(std::isnan(big.reduced_window_value));
}

TEST(Fits, ZeroVarianceIsDegenerate) {
  const DistributionSpec unit = DistributionSpec::constant(1.0);
  EXPECT_THROW(estimate_chi(unit, 1, {1, 0}, {4, 8, 16, 32, 64}, 10), DegenerateEstimate);
  std::vector<std::vector<double>> flat(kGrid.size(), std::vector<double>(10, 3.0));
  EXPECT_THROW(fit_chi(kGrid, flat, 1), DegenerateEstimate);
  std::vector<std::vector<double>> zero(kGrid.size(), std::vector<double>(10, 0.0));
  EXPECT_THROW(fit_xi(kGrid, zero, 1), DegenerateEstimate);
}

TEST(Fits, UnitWeightsAxisDeviationIsZero) {
  // A straight axis geodesic has zero transversal deviation.
  const DistributionSpec unit = DistributionSpec::constant(1.0);
  EXPECT_THROW(estimate_xi(unit, 1, {1, 0}, {4, 8, 16, 32, 64}, 4), DegenerateEstimate);
}

TEST(Fits, ExponentialLatticeWithinBounds) {
  const DistributionSpec expo = DistributionSpec::exponential(1.0);
  const std::vector<int> grid = {8, 12, 16, 24, 32};
  const auto table = collect_geodesic_table(expo, 11, {1, 0}, grid, 300, 1);
  const auto chi = estimate_chi(table, 11);
  const auto xi = estimate_xi(table, 11);
  EXPECT_LE(chi.value, 0.5 + 2.0 * chi.std_error);
  EXPECT_GE(chi.value, -2.0 * chi.std_error);
  EXPECT_LE(xi.value, 1.0 + 2.0 * xi.std_error);
  EXPECT_GT(xi.value, 0.3);
  // The same seed reproduces the same numbers.
  EXPECT_EQ(estimate_chi(table, 11).value, chi.value);
}

TEST(Grid, GeometricCheck) {
  EXPECT_NO_THROW(check_geometric_grid({32, 48, 64, 96, 128}, 5));
  EXPECT_NO_THROW(check_geometric_grid(kGrid, 5));
  EXPECT_THROW(check_geometric_grid({16, 32, 64}, 5), std::invalid_argument);
  EXPECT_THROW(check_geometric_grid({16, 17, 32, 64, 128}, 5), std::invalid_argument);
  EXPECT_THROW(check_geometric_grid({4, 32, 64, 128, 256}, 5), std::invalid_argument);
  EXPECT_THROW(check_geometric_grid({32, 16, 64, 128, 256}, 5), std::invalid_argument);
}

TEST(Grid, DefaultReplicaSchedule) {
  EXPECT_EQ(default_replicas(16), 62500u);
  EXPECT_EQ(default_replicas(64), 15625u);
  EXPECT_EQ(default_replicas(3), 333334u);
  EXPECT_EQ(default_replicas(10000), 200u);
  EXPECT_THROW(default_replicas(0), std::invalid_argument);
}

TEST(Flavor, RoundTrip) {
  for (auto f : {ExponentFlavor::kChiVariance, ExponentFlavor::kChiTail,
                 ExponentFlavor::kXiMean, ExponentFlavor::kXiTail}) {
    EXPECT_EQ(exponent_flavor_from_string(to_string(f)), f);
  }
  EXPECT_THROW(exponent_flavor_from_string("zeta"), std::invalid_argument);
}

TEST(Tail, ZeroVarianceMomentsAreOne) {
  const std::vector<int> grid = {8, 16, 32};
  std::vector<std::vector<double>> s(grid.size(), std::vector<double>(500, 5.0));
  const auto r = tail_diagnostic(grid, s, 0.3, {0.5, 1.0, 4.0});
  for (const auto& row : r.cells) {
    for (const auto& c : row) EXPECT_EQ(c.moment, 1.0);
  }
  EXPECT_TRUE(r.all_stable());
}

TEST(Tail, GaussianMatchesClosedForm) {
  // E exp(a |Z|) = 2 exp(a^2 / 2) Phi(a).
  const std::vector<double> alphas = {0.25, 0.5, 1.0};
  const std::vector<double> oracle = {1.2354226091027345, 1.5670592366928566,
                                      2.7742859576700094};
  const std::vector<int> grid = {8, 16, 32, 64};
  std::vector<std::vector<double>> s;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> xs(20000);
    for (double& x : xs) x = z(rng);
    s.push_back(std::move(xs));
  }
  const auto r = tail_diagnostic(grid, s, 0.0, alphas);
  EXPECT_TRUE(r.all_stable());
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    // Four Monte Carlo standard errors, from Var exp(a|Z|) = M(2a) - M(a)^2.
    const double m2 = 2.0 * std::exp(2.0 * alphas[a] * alphas[a]) *
                      0.5 * std::erfc(-2.0 * alphas[a] / std::sqrt(2.0));
    const double tol = 4.0 * std::sqrt((m2 - oracle[a] * oracle[a]) / 20000.0);
    for (const auto& c : r.cells[a]) EXPECT_NEAR(c.moment, oracle[a], tol);
  }
}

TEST(Tail, OverflowCountsAsGrowing) {
  const std::vector<int> grid = {8, 16};
  std::vector<std::vector<double>> s(2, std::vector<double>(500, 0.0));
  s[1][0] = 1e6;
  const auto r = tail_diagnostic(grid, s, 0.0, {1.0}, false);
  EXPECT_TRUE(r.cells[0][1].overflow);
  EXPECT_EQ(r.verdicts[0], "growing");
}

TEST(Tail, NeedsFiveHundredSamples) {
  std::vector<std::vector<double>> s(1, std::vector<double>(499, 1.0));
  EXPECT_THROW(tail_diagnostic({8}, s, 0.3, {1.0}), InsufficientData);
}

TEST(Tail, ExponentialPassageTimes) {
  const DistributionSpec expo = DistributionSpec::exponential(1.0);
  const std::vector<int> grid = {8, 16, 32, 64};
  const auto table = collect_geodesic_table(expo, 29, {1, 0}, grid, 500, 1);
  std::vector<std::vector<double>> times(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (const auto& g : table.samples[i]) times[i].push_back(g.time);
  }
  const std::vector<double> alphas = {0.5, 1.0, 2.0};
  const auto loose = tail_diagnostic(grid, times, 0.45, alphas);
  const auto tight = tail_diagnostic(grid, times, 0.15, alphas);
  EXPECT_TRUE(loose.all_stable());
  EXPECT_FALSE(tight.all_stable());
  for (const auto& row : tight.cells) {
    for (const auto& c : row) EXPECT_GE(c.moment, 1.0);
  }
  const auto est = tail_exponent(ExponentFlavor::kChiTail, grid, times, alphas);
  EXPECT_GT(est.value, 0.15);
  EXPECT_LE(est.value, 0.45);
  EXPECT_THROW(tail_exponent(ExponentFlavor::kChiVariance, grid, times, alphas),
               std::invalid_argument);
}

TEST(Kpz, WorkedExamples) {
  const auto kpz = check_kpz(exact(1.0 / 3.0), exact(2.0 / 3.0));
  EXPECT_NEAR(kpz.discrepancy, 0.0, 1e-15);
  EXPECT_FALSE(kpz.relation_violated);

  const auto off = check_kpz(exact(0.5), exact(0.5));
  EXPECT_DOUBLE_EQ(off.discrepancy, 0.5);
  EXPECT_TRUE(off.relation_violated);
  EXPECT_FALSE(off.chi_above_half);

  const auto wide = check_kpz(exact(0.5, 0.2), exact(0.5, 0.1));
  EXPECT_NEAR(wide.discrepancy_stderr, std::sqrt(0.04 + 0.04), 1e-15);
  EXPECT_FALSE(wide.relation_violated);
}

TEST(Kpz, GeneralizedWithKappaOne) {
  // kappa = 1 reduces the generalized relation to chi = xi.
  const auto r = check_kpz(exact(0.3), exact(0.7), 1.0, 0.0);
  ASSERT_TRUE(r.kappa.has_value());
  EXPECT_DOUBLE_EQ(r.generalized_discrepancy, 0.3 - 0.7);
  EXPECT_TRUE(r.generalized_violated);
  const auto two = check_kpz(exact(1.0 / 3.0), exact(2.0 / 3.0), 2.0, 0.1);
  EXPECT_NEAR(two.generalized_discrepancy, 0.0, 1e-15);
}

TEST(Kpz, Flags) {
  EXPECT_TRUE(check_kpz(exact(0.8, 0.1), exact(0.9)).chi_above_half);
  EXPECT_TRUE(check_kpz(exact(0.3), exact(1.4, 0.1)).xi_above_one);
  EXPECT_TRUE(check_kpz(exact(-0.5, 0.1), exact(0.5)).negative_exponent);
  EXPECT_THROW(check_kpz(exact(NAN), exact(0.5)), DegenerateEstimate);
  CurvatureEstimate flat;
  flat.flat = true;
  EXPECT_THROW(check_kpz(exact(0.3), exact(0.6), &flat), DegenerateEstimate);
}

}  // namespace
}  // namespace fpplab
