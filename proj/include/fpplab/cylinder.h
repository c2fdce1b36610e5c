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

// Shifted-cylinder experiment: two parallel passage times T1 (from 0) and T2
// (from S x1), their restricted (T') and gate-crossing (T'') versions, the
// coupling events, and the crossing fluctuations X0, X1 that bound the
// crossing difference pathwise.

#ifndef FPPLAB_CYLINDER_H_
#define FPPLAB_CYLINDER_H_

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fpplab/environment.h"
#include "fpplab/geodesic.h"
#include "fpplab/lattice.h"

namespace fpplab {

// Which passage times a replica computes.
//   plain:      T1, T2
//   restricted: plus T1', T2' and B_restricted
//   full:       plus T1'', T2'', B_crossing, X0, X1 and crossing vertices
enum class MeasurementLevel { kPlain, kRestricted, kFull };

std::string_view to_string(MeasurementLevel level);
MeasurementLevel measurement_level_from_string(std::string_view name);

struct CylinderExperimentConfig {
  int dim = 2;
  int n = 64;
  int direction_axis = 0;   // x0 = e_axis
  int transverse_axis = 1;  // x1 = e_axis, != direction_axis
  double xi_prime = 0.7;
  double beta = 0.85;
  double shift_multiplier = 4.0;
  double outer_radius_multiplier = 5.0;
  std::size_t replicas = 500;
  std::uint64_t seed = 0;
  DistributionSpec distribution = DistributionSpec::exponential(1.0);
  MeasurementLevel level = MeasurementLevel::kFull;

  // Throws std::invalid_argument on a malformed config.
  void validate() const;
};

// Integer geometry derived once from a config. Every later formula uses these
// rounded values.
struct CylinderGeometry {
  int n = 0;
  int radius = 0;        // ceil(n^xi')
  int shift = 0;         // ceil(shift_multiplier n^xi')
  int outer_radius = 0;  // max(ceil(outer_multiplier n^xi'), radius + shift)
  int h1 = 0;            // min(ceil(n^beta), ceil(n/2) - 1)
  int h2 = 0;            // n - h1; H0..H3 sit at x0-coordinates 0, h1, h2, n
  bool h1_clamped = false;
  LatticePoint start1, end1;  // 0, n x0
  LatticePoint start2, end2;  // S x1, n x0 + S x1
  CylinderRegion c1{{0.0}, {1.0}, 0.0, 0.0};
  CylinderRegion c2{{0.0}, {1.0}, 0.0, 0.0};
  CylinderRegion outer{{0.0}, {1.0}, 0.0, 0.0};
  BoxRegion box;  // common search box
  std::vector<LatticePoint> slab[4];  // V_i = H_i cap C
  GateSet gate1, gate2;               // H_i cap (C1 cup C2), i = 1, 2
  std::vector<std::uint8_t> gate_mask;  // per box vertex: bit 0 gate1, bit 1 gate2

  static CylinderGeometry build(const CylinderExperimentConfig& config);
};

struct CylinderReplicaRecord {
  std::uint64_t replica = 0;
  MeasurementLevel level = MeasurementLevel::kFull;
  // NaN when the level does not measure the quantity.
  double t1 = 0.0, t2 = 0.0;
  double t1_restricted = 0.0, t2_restricted = 0.0;
  double t1_crossing = 0.0, t2_crossing = 0.0;
  double delta = 0.0, delta_restricted = 0.0, delta_crossing = 0.0;
  bool b_restricted = false;
  bool b_crossing = false;
  double x0 = 0.0, x1 = 0.0;
  // a1, a2 on the T2'' path; a1', a2' on the T1'' path. Each is the first
  // vertex of the path inside the gate (a2 after a1).
  LatticePoint a1, a2, a1_prime, a2_prime;
  bool feasible = true;
  bool touched_boundary = false;
  bool gate_order_ok = true;
  bool flagged = false;
  std::string flag_reason;
};

// Runs one replica on the environment seeded by
// derive_replica_seed(seed, "cylinder", replica).
CylinderReplicaRecord run_replica(const CylinderExperimentConfig& config,
                                  std::uint64_t replica);
CylinderReplicaRecord run_replica(const CylinderExperimentConfig& config,
                                  const CylinderGeometry& geometry,
                                  std::uint64_t replica);

// Replicas [first, first + count), in index order.
std::vector<CylinderReplicaRecord> run_replicas(const CylinderExperimentConfig& config,
                                                std::uint64_t first, std::size_t count,
                                                int workers = 1);

// Pathwise invariants of an unflagged record; one message per violation.
// Comparisons allow a relative rounding tolerance.
std::vector<std::string> check_record_invariants(const CylinderReplicaRecord& record,
                                                 double rel_tol = 1e-9);

// max over pairs tau(v, w) - min over pairs tau(v, w), v in lo, w in hi,
// with tau computed inside the weights' box. The minimum is one multi-source
// sweep. The maximum runs one sweep per source but skips sources whose
// triangle-inequality bound cannot beat the current maximum.
double crossing_fluctuation(const BoxWeights& weights, std::span<const LatticePoint> lo,
                            std::span<const LatticePoint> hi);
double crossing_fluctuation(const Environment& env, std::span<const LatticePoint> lo,
                            std::span<const LatticePoint> hi, const BoxRegion& box);
// Reference version: one full sweep per vertex of the smaller set.
double crossing_fluctuation_all_pairs(const BoxWeights& weights,
                                      std::span<const LatticePoint> lo,
                                      std::span<const LatticePoint> hi);

struct Measured {
  double value = 0.0;
  double std_error = 0.0;
};

struct PerturbationCheck {
  double left = 0.0;   // |Var X - Var Y|
  double right = 0.0;  // (|X|_4 + |Y|_4)^2 P(B^c)^(1/4)
  double left_stderr = 0.0;
  double right_stderr = 0.0;
  double escape_probability = 0.0;
  bool holds = false;
  bool precondition_ok = true;
  std::int64_t violating_index = -1;  // first i with (X_i - Y_i) 1_B != 0
  std::string message;
};

// Population (plug-in) moments of the samples. The hypothesis (X - Y) 1_B = 0
// is checked exactly; a violation yields precondition_ok = false.
PerturbationCheck verify_variance_perturbation(std::span<const double> x,
                                               std::span<const double> y,
                                               std::span<const std::uint8_t> b,
                                               std::uint64_t bootstrap_seed = 0);

inline constexpr std::size_t kMinAggregateRecords = 100;
inline constexpr double kMaxFlaggedFraction = 0.01;

struct VarianceBoundsReport {
  std::size_t records = 0;
  std::size_t flagged = 0;
  std::vector<std::pair<std::string, std::size_t>> flag_reasons;
  MeasurementLevel level = MeasurementLevel::kPlain;

  Measured var_delta;
  Measured var_delta_restricted;   // NaN below restricted level
  Measured twice_var_t1_restricted;
  Measured iid_gap;                // Var dT' - 2 Var T1'
  Measured corr_restricted;        // corr(T1', T2')
  Measured var_delta_crossing;     // NaN below full level
  Measured four_x0_second_moment;  // 4 E[X0^2]
  Measured escape_probability;     // P(B_restricted^c)
  PerturbationCheck perturbation;  // (dT, dT', B_restricted)

  bool upper_bound_holds = true;    // Var dT <= 4 E[X0^2] + 2 stderr
  bool independence_holds = true;   // |corr| < 3 stderr
  bool iid_identity_holds = true;   // |iid_gap| < 3 stderr
  std::vector<std::string> warnings;
};

// Throws InsufficientData with fewer than kMinAggregateRecords unflagged
// records and UnreliableEstimate when more than 1% are flagged.
VarianceBoundsReport aggregate(std::span<const CylinderReplicaRecord> records,
                               std::uint64_t bootstrap_seed = 0);

struct ScalingRow {
  int n = 0;
  std::size_t replicas = 0;
  std::size_t flagged = 0;
  Measured var_delta;
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  double exponent = 0.0;  // slope of log Var dT against log n
  double exponent_stderr = 0.0;
  bool degenerate = false;
  double reference_lower = 0.0;  // 2 chi when supplied, NaN otherwise
  double reference_lower_stderr = 0.0;
  double reference_upper = 0.0;  // 2 (2 xi' - beta)
  std::vector<std::string> warnings;
};

// Fit of per-n sample variances of delta samples (bootstrap errors).
// All-zero variances give degenerate = true rather than an error.
ScalingTable fit_variance_scaling(const std::vector<int>& n_grid,
                                  const std::vector<std::vector<double>>& deltas,
                                  std::uint64_t bootstrap_seed);

// Runs the plain level at every n of a geometric grid (>= 4 points) and fits
// Var dT. chi_estimate (from the exponents module) sets the lower reference
// 2 chi; NaN leaves it unset.
ScalingTable sweep_n(const CylinderExperimentConfig& config_template,
                     const std::vector<int>& n_grid, int workers = 1,
                     double chi_estimate = std::numeric_limits<double>::quiet_NaN(),
                     double chi_estimate_stderr = 0.0);

}  // namespace fpplab

#endif  // FPPLAB_CYLINDER_H_
