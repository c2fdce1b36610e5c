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

// Time constant, flat directions, curvature exponent and the non-random
// fluctuation gap of the limit shape.

#ifndef FPPLAB_SHAPE_H_
#define FPPLAB_SHAPE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fpplab/environment.h"
#include "fpplab/lattice.h"
#include "fpplab/sampling.h"

namespace fpplab {

struct ScaleStatistic {
  int n = 0;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
  std::size_t truncated = 0;
};

inline constexpr double kAlexanderChiPrime = 0.45;

struct TimeConstantEstimate {
  RealVector direction;
  std::vector<ScaleStatistic> per_n;  // statistics of tau(0, floor(n v))
  double g = 0.0;
  double g_stderr = 0.0;
  // "richardson(chi'=0.45)" or "largest_n"; the former falls back to the
  // latter when the fit breaks the subadditivity bound.
  std::string method;
  std::vector<std::string> warnings;
};

struct ShapeOptions {
  int workers = 1;
  // false: report the largest-n mean / n without extrapolation.
  bool extrapolate = true;
};

// Per-n Monte Carlo means of tau(0, floor(n v)) and an estimate of g(v). The
// extrapolation regresses mean/n on n^(chi'-1) with chi' = 0.45 and reads g
// off the intercept.
TimeConstantEstimate estimate_time_constant(const DistributionSpec& spec,
                                            std::uint64_t seed,
                                            const RealVector& direction,
                                            const std::vector<int>& n_grid,
                                            std::size_t replicas,
                                            const ShapeOptions& options = {});

// The same estimate from samples already drawn, one set per n.
TimeConstantEstimate time_constant_from_samples(
    const RealVector& direction, const std::vector<int>& n_grid,
    const std::vector<std::vector<GeodesicSample>>& samples, const ShapeOptions& options = {});

inline constexpr double kCurvatureValidityRadius = 0.25;

struct CurvatureEstimate {
  LatticePoint direction;  // u, an axis or the main diagonal
  LatticePoint tangent;    // t, spanning u^perp (in d = 2)
  int n = 0;
  std::vector<int> steps;           // k: evaluated at n u + k t
  std::vector<double> offsets;      // |z| / |u| = k |t| / (n |u|)
  std::vector<double> gaps;         // mean of (tau(0, n u + k t) - tau(0, n u)) / n
  std::vector<double> gap_stderr;
  std::size_t replicas = 0;
  std::size_t truncated = 0;
  double validity_radius = kCurvatureValidityRadius;
  bool flat = false;
  double kappa = 0.0;  // NaN when flat or without enough positive gaps
  double kappa_stderr = 0.0;
  double fit_r_squared = 0.0;
  std::vector<std::string> warnings;
};

inline std::vector<double> default_curvature_offsets() {
  return {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};
}

// Flat iff every gap lies within two standard errors of 0. Requires the
// offsets to span at least a factor of ten.
bool detect_flat_direction(const CurvatureEstimate& curv);

// Distinct tangent steps k >= 1 (sorted) for the offsets at scale n. Throws
// std::invalid_argument for offsets outside (0, validity radius], for
// directions other than an axis or the main diagonal, and when the rounded
// offsets span less than a decade.
std::vector<int> curvature_steps(const LatticePoint& u, const std::vector<double>& offsets,
                                 int n);

// Paired gap estimates g(u + z) - g(u) at a common n on each replica, and a
// log-log fit of gap against |z|. u must be an axis direction or the main
// diagonal so that its tangent hyperplane is u^perp by lattice symmetry.
CurvatureEstimate estimate_curvature_exponent(const DistributionSpec& spec,
                                              std::uint64_t seed,
                                              const LatticePoint& u,
                                              const std::vector<double>& offsets,
                                              int n, std::size_t replicas,
                                              const ShapeOptions& options = {});

struct AlexanderGapPoint {
  int n = 0;
  double mean = 0.0;
  double gap = 0.0;  // |mean - n g_ref|
  double gap_stderr = 0.0;
};

struct AlexanderGapCurve {
  RealVector direction;
  double g_ref = 0.0;
  std::vector<AlexanderGapPoint> points;
  double exponent = 0.0;  // NaN when some gap vanishes
  double exponent_stderr = 0.0;
  // gap / n is non-increasing along the grid within two standard errors.
  bool sublinear = true;
  std::vector<std::string> warnings;
};

// Requires g_ref to come from a scale at least four times max(n_grid).
AlexanderGapCurve alexander_gap(const DistributionSpec& spec, std::uint64_t seed,
                                const RealVector& direction,
                                const std::vector<int>& n_grid, std::size_t replicas,
                                const TimeConstantEstimate& g_ref,
                                const ShapeOptions& options = {});

}  // namespace fpplab

#endif  // FPPLAB_SHAPE_H_
