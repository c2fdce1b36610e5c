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

// Exact passage times and geodesics on finite boxes of Z^d.
//
// All searches are Dijkstra over the box graph. A search may be restricted to
// a vertex mask (an edge is usable iff both endpoints are allowed) and may
// carry up to kMaxGates gate sets; gated searches run on the product graph
// whose state is (vertex, set of gates visited so far), so the returned path
// is the cheapest walk that meets every gate.
//
// Tie-breaking: among equal-cost predecessors the lexicographically smallest
// vertex wins, which makes returned geodesics deterministic even for
// discrete weight laws.

#ifndef FPPLAB_GEODESIC_H_
#define FPPLAB_GEODESIC_H_

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fpplab/environment.h"
#include "fpplab/lattice.h"

namespace fpplab {

inline constexpr int kMaxGates = 4;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Edge weights of one environment inside a box, generated on first use.
// Not thread-safe: give each worker its own instance.
class BoxWeights {
 public:
  BoxWeights(const Environment& env, BoxRegion box);

  const Environment& env() const { return *env_; }
  const BoxRegion& box() const { return box_; }

  // Bit 2a (2a+1) set iff the vertex has no neighbour in -e_a (+e_a) inside
  // the box.
  std::uint8_t border(std::size_t index) const { return border_[index]; }

  // Weight of the edge {v, v + e_axis} where v is the vertex at `index`.
  // The head must lie inside the box.
  double forward(std::size_t index, int axis) const {
    double& w = cache_[axis][index];
    if (std::isnan(w)) w = env_->weight_at(box_.point_at(index), axis);
    return w;
  }

 private:
  const Environment* env_;
  BoxRegion box_;
  std::vector<std::uint8_t> border_;
  mutable std::array<std::vector<double>, kMaxDim> cache_;
};


struct PathResult {
  double time = 0.0;
  std::vector<LatticePoint> vertices;
  bool touched_boundary = false;
  bool feasible = false;
};

// Restrictions applied to a search. Spans index box vertices.
struct SearchConstraints {
  std::span<const std::uint8_t> allowed;    // empty: every vertex allowed
  std::span<const std::uint8_t> gate_bits;  // bit g set iff vertex in gate g
  int num_gates = 0;
};

// Reusable Dijkstra workspace over one BoxWeights. Repeated runs only reset
// the states touched by the previous run.
class ShortestPathSearch {
 public:
  explicit ShortestPathSearch(const BoxWeights& weights,
                              SearchConstraints constraints = {});

  // Settles states from `source` until every target (in the all-gates layer)
  // is settled. With no targets the whole reachable graph is settled.
  void run(const LatticePoint& source, std::span<const LatticePoint> targets = {});
  // As run(), from a super-source joined to every listed source at cost 0.
  void run(std::span<const LatticePoint> sources,
           std::span<const LatticePoint> targets = {});

  // Distance to `p` in the all-gates layer, +inf if unreachable.
  double distance(const LatticePoint& p) const;
  // Geodesic to `p` in the all-gates layer; infeasible if unreachable.
  PathResult path_to(const LatticePoint& p) const;

  const BoxWeights& weights() const { return *weights_; }
  std::size_t settled_count() const { return settled_count_; }

 private:
  using State = std::uint32_t;
  static constexpr State kNone = std::numeric_limits<State>::max();

  State state_of(std::size_t vertex, unsigned mask) const {
    return static_cast<State>((vertex << shift_) | mask);
  }
  unsigned gates_at(std::size_t vertex) const {
    return constraints_.gate_bits.empty() ? 0u : constraints_.gate_bits[vertex];
  }
  void reset();

  const BoxWeights* weights_;
  SearchConstraints constraints_;
  unsigned shift_ = 0;
  unsigned layers_;
  unsigned full_mask_;
  std::vector<double> dist_;
  std::vector<State> pred_;
  std::vector<std::uint8_t> settled_;
  std::vector<std::uint8_t> target_mark_;
  std::vector<State> touched_;
  std::vector<std::pair<double, State>> heap_;
  std::size_t settled_count_ = 0;
};

// tau(x, y) over paths inside `box`.
PathResult passage_time(const Environment& env, const LatticePoint& x,
                        const LatticePoint& y, const BoxRegion& box);
PathResult passage_time(const BoxWeights& weights, const LatticePoint& x,
                        const LatticePoint& y);

// tau(x, y) over paths whose every edge has both endpoints in `region`.
PathResult restricted_passage_time(const Environment& env, const LatticePoint& x,
                                   const LatticePoint& y,
                                   const CylinderRegion& region,
                                   const BoxRegion& box);
PathResult restricted_passage_time(const BoxWeights& weights,
                                   const LatticePoint& x, const LatticePoint& y,
                                   const CylinderRegion& region);

// Cheapest walk from a to b inside `box` that meets every gate set.
using GateSet = std::vector<LatticePoint>;
PathResult crossing_passage_time(const Environment& env, const LatticePoint& a,
                                 const LatticePoint& b,
                                 std::span<const GateSet> gates,
                                 const BoxRegion& box);
PathResult crossing_passage_time(const BoxWeights& weights,
                                 const LatticePoint& a, const LatticePoint& b,
                                 std::span<const GateSet> gates);

// Largest Euclidean distance from a path vertex to the segment [x, y].
double max_transversal_deviation(const PathResult& path, const LatticePoint& x,
                                 const LatticePoint& y);

// Exhaustive minimum over self-avoiding paths; boxes of at most 16 vertices.
double brute_force_passage_time(const Environment& env, const LatticePoint& x,
                                const LatticePoint& y, const BoxRegion& box);

inline constexpr std::size_t kBruteForceMaxVertices = 16;

// Sum of edge weights along a vertex sequence (independent recomputation).
double path_weight(const Environment& env, std::span<const LatticePoint> vertices);

// Margin max(ceil(4 n^0.8), 16) around the endpoints of a scale-n query.
int standard_margin(double scale);

struct ScaledPathResult {
  PathResult path;
  BoxRegion box;
  int retries = 0;
  bool truncation_warning = false;
};

// passage_time on the bounding box of {x, y} inflated by standard_margin;
// re-runs with doubled margin (at most twice) while the geodesic touches the
// box boundary, and sets truncation_warning if it still does.
ScaledPathResult passage_time_at_scale(const Environment& env,
                                       const LatticePoint& x,
                                       const LatticePoint& y, double scale);

}  // namespace fpplab

#endif  // FPPLAB_GEODESIC_H_
