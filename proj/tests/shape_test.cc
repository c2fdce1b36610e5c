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

#include "fpplab/shape.h"

#include <cmath>

#include <gtest/gtest.h>

#include "fpplab/sampling.h"

namespace fpplab {
namespace {

const DistributionSpec kUnit = DistributionSpec::constant(1.0);
const DistributionSpec kExp = DistributionSpec::exponential(1.0);

TEST(TimeConstant, UnitWeightsGiveL1Norm) {
  const std::vector<int> grid = {4, 8, 16, 32};
  const std::vector<std::pair<RealVector, double>> cases = {
      {{1, 0}, 1.0}, {{0, 1}, 1.0}, {{1, 1}, 2.0}, {{2, 3}, 5.0}};
  for (const auto& [v, l1] : cases) {
    const auto est = estimate_time_constant(kUnit, 1, v, grid, 3);
    EXPECT_EQ(est.g, l1);
    for (const auto& s : est.per_n) {
      EXPECT_EQ(s.mean, l1 * s.n);
      EXPECT_EQ(s.std_error, 0.0);
    }
  }
}

TEST(TimeConstant, RejectsBadGrid) {
  EXPECT_THROW(estimate_time_constant(kUnit, 1, {1, 0}, {8, 4}, 2), std::invalid_argument);
  EXPECT_THROW(estimate_time_constant(kUnit, 1, {0, 0}, {4, 8}, 2), std::invalid_argument);
  EXPECT_THROW(estimate_time_constant(kUnit, 1, {1, 0}, {}, 2), std::invalid_argument);
}

TEST(TimeConstant, BoundedBySubadditivity) {
  const auto est = estimate_time_constant(kExp, 7, {1, 0}, {8, 16, 32}, 150);
  double bound = 1e300;
  for (const auto& s : est.per_n) {
    EXPECT_GE(s.mean, 0.0);
    bound = std::min(bound, s.mean / s.n + s.std_error / s.n);
  }
  EXPECT_LE(est.g, bound);
  EXPECT_GT(est.g, 0.3);
  EXPECT_LT(est.g, 0.6);
}

TEST(TimeConstant, LatticeSymmetry) {
  // Plain largest-n means: a two-point extrapolation inflates the noise.
  ShapeOptions plain;
  plain.extrapolate = false;
  const std::vector<int> grid = {32};
  const auto a = estimate_time_constant(kExp, 21, {1, 0}, grid, 400, plain);
  const auto b = estimate_time_constant(kExp, 21, {0, 1}, grid, 400, plain);
  EXPECT_LE(std::abs(a.g - b.g), 2.0 * std::hypot(a.g_stderr, b.g_stderr));
}

TEST(TimeConstant, HomogeneityAndConvexity) {
  ShapeOptions plain;
  plain.extrapolate = false;
  const std::vector<int> grid = {32};
  const auto e1 = estimate_time_constant(kExp, 3, {1, 0}, grid, 300, plain);
  const auto e2 = estimate_time_constant(kExp, 3, {0, 1}, grid, 300, plain);
  const auto twice = estimate_time_constant(kExp, 3, {2, 0}, {16}, 300, plain);
  // g(2 e1) at n = 16 and g(e1) at n = 32 are the same passage time.
  EXPECT_LE(std::abs(twice.g - 2.0 * e1.g),
            2.0 * std::hypot(twice.g_stderr, 2.0 * e1.g_stderr));
  const auto mid = estimate_time_constant(kExp, 3, {0.5, 0.5}, grid, 300, plain);
  EXPECT_LE(mid.g, 0.5 * (e1.g + e2.g) + 2.0 * std::hypot(mid.g_stderr, e1.g_stderr));
}

TEST(Curvature, UnitWeightsAxisHasKappaOne) {
  const auto est = estimate_curvature_exponent(kUnit, 1, LatticePoint{1, 0},
                                               default_curvature_offsets(), 64, 2);
  EXPECT_FALSE(est.flat);
  ASSERT_EQ(est.gaps.size(), 5u);
  for (std::size_t k = 0; k < est.gaps.size(); ++k) {
    EXPECT_DOUBLE_EQ(est.gaps[k], est.offsets[k]);  // gap = |t| exactly
  }
  EXPECT_NEAR(est.kappa, 1.0, 1e-12);
  EXPECT_EQ(est.tangent, (LatticePoint{0, 1}));
}

TEST(Curvature, UnitWeightsDiagonalIsFlat) {
  const auto est = estimate_curvature_exponent(kUnit, 1, LatticePoint{1, 1},
                                               default_curvature_offsets(), 64, 2);
  EXPECT_TRUE(est.flat);
  EXPECT_TRUE(std::isnan(est.kappa));
  for (double g : est.gaps) EXPECT_EQ(g, 0.0);
  EXPECT_EQ(est.tangent, (LatticePoint{1, -1}));
}

TEST(Curvature, Preconditions) {
  EXPECT_THROW(estimate_curvature_exponent(kUnit, 1, LatticePoint{2, 1},
                                           default_curvature_offsets(), 16, 2),
               std::invalid_argument);
  EXPECT_THROW(estimate_curvature_exponent(kUnit, 1, LatticePoint{1, 0}, {0.5}, 16, 2),
               std::invalid_argument);
  CurvatureEstimate narrow;
  narrow.offsets = {0.1, 0.2};
  narrow.gaps = {0.0, 0.0};
  narrow.gap_stderr = {0.0, 0.0};
  EXPECT_THROW(detect_flat_direction(narrow), std::invalid_argument);
}

TEST(Curvature, ExponentialAxisNotFlat) {
  const auto est = estimate_curvature_exponent(kExp, 5, LatticePoint{1, 0},
                                               default_curvature_offsets(), 64, 120);
  EXPECT_FALSE(est.flat);
  EXPECT_GT(est.gaps.back(), 5.0 * est.gap_stderr.back());
  for (std::size_t k = 0; k < est.gaps.size(); ++k) {
    EXPECT_GE(est.gaps[k], -2.0 * est.gap_stderr[k]);
  }
}

TEST(AlexanderGap, UnitWeightsVanish) {
  const auto ref = estimate_time_constant(kUnit, 1, {1, 0}, {64}, 2);
  const auto curve = alexander_gap(kUnit, 1, {1, 0}, {4, 8, 16}, 2, ref);
  for (const auto& p : curve.points) EXPECT_EQ(p.gap, 0.0);
  EXPECT_TRUE(curve.sublinear);
  EXPECT_TRUE(std::isnan(curve.exponent));
}

TEST(AlexanderGap, RequiresLargeReferenceScale) {
  const auto ref = estimate_time_constant(kUnit, 1, {1, 0}, {32}, 2);
  EXPECT_THROW(alexander_gap(kUnit, 1, {1, 0}, {4, 16}, 2, ref), std::invalid_argument);
}

TEST(AlexanderGap, ExponentialSublinear) {
  ShapeOptions plain;
  plain.extrapolate = false;
  const auto ref = estimate_time_constant(kExp, 9, {1, 0}, {128}, 60, plain);
  const auto curve = alexander_gap(kExp, 9, {1, 0}, {8, 16, 32}, 200, ref);
  EXPECT_TRUE(curve.sublinear);
}

TEST(Sampling, ExperimentIdIsStable) {
  EXPECT_EQ(geodesic_experiment_id(64, {1, 0}), "geodesic/n=64/dir=1,0");
  EXPECT_EQ(geodesic_experiment_id(8, {0.5, 0.5}), "geodesic/n=8/dir=0.5,0.5");
  EXPECT_EQ(scaled_endpoint(7, {0.5, 1.0}), (LatticePoint{3, 7}));
}

TEST(Sampling, IndependentOfWorkerCount) {
  const auto a = sample_geodesics(kExp, 2, 16, {1, 0}, 12, 1);
  const auto b = sample_geodesics(kExp, 2, 16, {1, 0}, 12, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].time, b[i].time);
    EXPECT_EQ(a[i].deviation, b[i].deviation);
  }
  const auto tail = sample_geodesics(kExp, 2, 16, {1, 0}, 4, 1, 8);
  for (std::size_t i = 0; i < tail.size(); ++i) EXPECT_EQ(tail[i].time, a[8 + i].time);
}

}  // namespace
}  // namespace fpplab
