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

// I.i.d. edge-weight fields on Z^d.
//
// Weights are generated statelessly: the weight of an edge is a pure function
// of the master seed and the canonical edge key, so lazily evaluated or
// concurrently evaluated fields are bit-identical to eagerly evaluated ones.

#ifndef FPPLAB_ENVIRONMENT_H_
#define FPPLAB_ENVIRONMENT_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fpplab/lattice.h"

namespace fpplab {

enum class DistributionKind { kExponential, kUniform, kGamma, kDiscrete };

std::string_view to_string(DistributionKind kind);
DistributionKind distribution_kind_from_string(std::string_view name);

struct Atom {
  double value = 0.0;
  double probability = 0.0;
};

struct DistributionSpec {
  DistributionKind kind = DistributionKind::kExponential;
  double rate = 1.0;           // exponential
  double lower = 0.0;          // uniform
  double upper = 1.0;          // uniform
  double shape = 1.0;          // gamma
  double scale = 1.0;          // gamma
  std::vector<Atom> atoms;     // discrete, sorted by value

  static DistributionSpec exponential(double rate);
  static DistributionSpec uniform(double lower, double upper);
  static DistributionSpec gamma(double shape, double scale);
  static DistributionSpec discrete(std::vector<Atom> atoms);
  // Point mass: every edge carries `value`.
  static DistributionSpec constant(double value);

  // Throws std::invalid_argument when parameters are malformed.
  void check_well_formed() const;

  double quantile(double u) const;
  double cdf(double x) const;
  double mean() const;
  double variance() const;
  double support_infimum() const;
  double atom_mass_at_infimum() const;
  bool is_point_mass() const;
};

struct ValidationResult {
  bool accepted = false;
  double atom_mass = 0.0;  // mass of the atom at the support infimum
  double threshold = 0.0;  // percolation threshold applied
  std::string message;
  std::vector<std::string> warnings;
};

// Accepts iff the atom mass at the support infimum is strictly below the
// percolation threshold for dimension `dim`. p_c(2) = 1/2. For d >= 3 masses
// at or above 1/2 (>= p_c(d)) are rejected and masses in [1/(2d-1), 1/2)
// only warn, since p_c(d) is not known in closed form. A point mass has no
// fluctuations at all; it is accepted with a warning so deterministic checks
// can run through the same pipeline.
ValidationResult validate_distribution(const DistributionSpec& spec, int dim);

double percolation_threshold_bound(int dim);

// Stafford "mix13" 64-bit finalizer (bijective).
std::uint64_t mix64(std::uint64_t z);

// Keyed seed derivation "fpplab-splitmix-v1":
//   f = FNV-1a-64(experiment_id)
//   s = mix64(mix64(master ^ mix64(f)) + mix64(replica_index + 0x9e3779b97f4a7c15))
// Stable across versions; changing it is a schema break.
std::uint64_t derive_replica_seed(std::uint64_t master,
                                  std::string_view experiment_id,
                                  std::uint64_t replica_index);

inline constexpr std::string_view kSeedDerivationRule = "fpplab-splitmix-v1";

// Immutable once constructed; safe to share across threads.
class Environment {
 public:
  // Throws DistributionRejected if the spec fails validate_distribution.
  Environment(DistributionSpec spec, std::uint64_t seed, int dim);

  const DistributionSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  int dim() const { return dim_; }

  double edge_weight(const EdgeId& e) const { return weight_at(e.base, e.axis); }
  // Either endpoint order addresses the same edge.
  double edge_weight(const LatticePoint& a, const LatticePoint& b) const;
  // Weight of the edge {base, base + e_axis}.
  double weight_at(const LatticePoint& base, int axis) const;

  // The uniform variate behind an edge; exposed for distribution tests.
  double uniform_at(const LatticePoint& base, int axis) const;

  // Copy whose listed edges carry the given weights instead of sampled ones.
  // Used to build hand-checked fixtures; weights must be >= 0.
  Environment with_fixed_weights(
      const std::vector<std::pair<EdgeId, double>>& fixed) const;

 private:
  struct EdgeLess {
    bool operator()(const EdgeId& a, const EdgeId& b) const {
      if (auto c = a.base <=> b.base; c != 0) return c < 0;
      return a.axis < b.axis;
    }
  };
  using FixedWeights = std::map<EdgeId, double, EdgeLess>;

  DistributionSpec spec_;
  std::uint64_t seed_;
  int dim_;
  std::shared_ptr<const FixedWeights> fixed_;
};

}  // namespace fpplab

#endif  // FPPLAB_ENVIRONMENT_H_
