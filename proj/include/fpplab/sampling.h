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

// Replica sampling of point-to-point passage times shared by the shape and
// exponents modules.

#ifndef FPPLAB_SAMPLING_H_
#define FPPLAB_SAMPLING_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fpplab/environment.h"
#include "fpplab/lattice.h"

namespace fpplab {

struct GeodesicSample {
  double time = 0.0;
  double deviation = 0.0;  // max transversal deviation of the geodesic
  bool truncated = false;  // still touching the box after all retries
  int retries = 0;
};

// "geodesic/n=<n>/dir=<c0,c1,...>": the experiment id whose replica seeds
// drive every sample of tau(0, floor(n v)).
std::string geodesic_experiment_id(int n, const RealVector& direction);

// Lattice endpoint floor(n v).
LatticePoint scaled_endpoint(int n, const RealVector& direction);

// Samples tau(0, floor(n v)) and its geodesic deviation for replicas
// [first, first + count), each on the environment seeded by
// derive_replica_seed(seed, geodesic_experiment_id(n, v), r).
std::vector<GeodesicSample> sample_geodesics(const DistributionSpec& spec,
                                             std::uint64_t seed, int n,
                                             const RealVector& direction,
                                             std::size_t count, int workers,
                                             std::size_t first = 0);

struct PairedDifferences {
  // differences[k][r] = tau(0, targets[k]) - tau(0, base) on replica r.
  std::vector<std::vector<double>> differences;
  std::vector<double> base_times;
  std::size_t truncated = 0;  // replicas whose geodesics kept touching the box
};

// One search from the origin per replica environment of `experiment_id`;
// every distance is taken in a common box around {0, base, targets} with the
// standard margin for `scale`, doubled up to twice while a geodesic touches
// the box boundary.
PairedDifferences sample_paired_differences(const DistributionSpec& spec,
                                            std::uint64_t seed,
                                            const std::string& experiment_id,
                                            const LatticePoint& base,
                                            const std::vector<LatticePoint>& targets,
                                            double scale, std::size_t count,
                                            int workers);

}  // namespace fpplab

#endif  // FPPLAB_SAMPLING_H_
