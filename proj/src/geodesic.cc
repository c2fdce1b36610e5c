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

#include "fpplab/geodesic.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fpplab {

namespace {

void require_in_box(const BoxRegion& box, const LatticePoint& p, const char* what) {
  if (!box.contains(p)) {
    throw std::invalid_argument(std::string(what) + " " + p.to_string() +
                                " lies outside the search box");
  }
}

// Runs `search` between x and y starting from the lexicographically smaller
// endpoint and returns the path oriented from x to y.
PathResult canonical_search(ShortestPathSearch& search, const LatticePoint& x,
                            const LatticePoint& y) {
  const bool flip = y < x;
  const LatticePoint& from = flip ? y : x;
  const LatticePoint& to = flip ? x : y;
  const LatticePoint targets[] = {to};
  search.run(from, targets);
  PathResult r = search.path_to(to);
  if (flip) std::reverse(r.vertices.begin(), r.vertices.end());
  return r;
}

}  // namespace

BoxWeights::BoxWeights(const Environment& env, BoxRegion box)
    : env_(&env), box_(std::move(box)) {
  if (box_.dim() != env.dim()) {
    throw std::invalid_argument("box dimension does not match the environment");
  }
  const std::size_t n = box_.num_vertices();
  for (int a = 0; a < box_.dim(); ++a) {
    cache_[a].assign(n, std::numeric_limits<double>::quiet_NaN());
  }
  border_.assign(n, 0);
  for (int a = 0; a < box_.dim(); ++a) {
    const std::size_t stride = static_cast<std::size_t>(box_.stride(a));
    const std::size_t extent = static_cast<std::size_t>(box_.extent(a));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = (i / stride) % extent;
      if (c == 0) border_[i] |= static_cast<std::uint8_t>(1u << (2 * a));
      if (c == extent - 1) border_[i] |= static_cast<std::uint8_t>(1u << (2 * a + 1));
    }
  }
}

namespace {

// Min-heap order: smaller distance first, then smaller state.
struct HeapAfter {
  bool operator()(const std::pair<double, std::uint32_t>& a,
                  const std::pair<double, std::uint32_t>& b) const {
    return a > b;
  }
};

}  // namespace

ShortestPathSearch::ShortestPathSearch(const BoxWeights& weights,
                                       SearchConstraints constraints)
    : weights_(&weights), constraints_(constraints) {
  if (constraints_.num_gates < 0 || constraints_.num_gates > kMaxGates) {
    throw std::invalid_argument("at most " + std::to_string(kMaxGates) +
                                " gates are supported");
  }
  const std::size_t n = weights.box().num_vertices();
  if (!constraints_.allowed.empty() && constraints_.allowed.size() != n) {
    throw std::invalid_argument("vertex mask size does not match the box");
  }
  if (!constraints_.gate_bits.empty() && constraints_.gate_bits.size() != n) {
    throw std::invalid_argument("gate table size does not match the box");
  }
  shift_ = static_cast<unsigned>(constraints_.num_gates);
  layers_ = 1u << shift_;
  full_mask_ = layers_ - 1;
  if (n * layers_ >= kNone) {
    throw std::invalid_argument("search graph too large");
  }
  dist_.assign(n * layers_, kInfinity);
  pred_.assign(n * layers_, kNone);
  settled_.assign(n * layers_, 0);
  target_mark_.assign(n * layers_, 0);
}

void ShortestPathSearch::reset() {
  for (State s : touched_) {
    dist_[s] = kInfinity;
    pred_[s] = kNone;
    settled_[s] = 0;
  }
  touched_.clear();
  heap_.clear();
  settled_count_ = 0;
}

void ShortestPathSearch::run(const LatticePoint& source,
                             std::span<const LatticePoint> targets) {
  run(std::span<const LatticePoint>(&source, 1), targets);
}

void ShortestPathSearch::run(std::span<const LatticePoint> sources,
                             std::span<const LatticePoint> targets) {
  const BoxRegion& box = weights_->box();
  if (sources.empty()) throw std::invalid_argument("no source given");
  reset();
  for (const LatticePoint& source : sources) {
    require_in_box(box, source, "source");
    const std::size_t src = box.index_of(source);
    if (!constraints_.allowed.empty() && !constraints_.allowed[src]) {
      throw std::invalid_argument("source " + source.to_string() +
                                  " is outside the allowed region");
    }
  }

  std::size_t remaining = 0;
  std::vector<State> marked;
  for (const LatticePoint& t : targets) {
    require_in_box(box, t, "target");
    const State ts = state_of(box.index_of(t), full_mask_);
    if (!target_mark_[ts]) {
      target_mark_[ts] = 1;
      marked.push_back(ts);
      ++remaining;
    }
  }
  const bool stop_on_targets = remaining > 0;

  const int d = box.dim();
  std::array<std::size_t, kMaxDim> stride{};
  for (int a = 0; a < d; ++a) stride[a] = static_cast<std::size_t>(box.stride(a));
  const bool masked = !constraints_.allowed.empty();
  const bool gated = !constraints_.gate_bits.empty();

  const HeapAfter after;
  for (const LatticePoint& source : sources) {
    const std::size_t src = box.index_of(source);
    const State s0 = state_of(src, gates_at(src));
    if (dist_[s0] == 0.0) continue;
    dist_[s0] = 0.0;
    touched_.push_back(s0);
    heap_.emplace_back(0.0, s0);
  }
  std::make_heap(heap_.begin(), heap_.end(), after);

  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), after);
    const auto [du, s] = heap_.back();
    heap_.pop_back();
    if (settled_[s] || du > dist_[s]) continue;
    settled_[s] = 1;
    ++settled_count_;
    if (target_mark_[s]) {
      if (--remaining == 0 && stop_on_targets) break;
    }
    const std::size_t v = s >> shift_;
    const unsigned mask = s & full_mask_;
    const unsigned border = weights_->border(v);
    for (int a = 0; a < d; ++a) {
      for (int dir = 0; dir < 2; ++dir) {
        if (border & (1u << (2 * a + dir))) continue;
        const std::size_t nv = dir ? v + stride[a] : v - stride[a];
        if (masked && !constraints_.allowed[nv]) continue;
        const double w = dir ? weights_->forward(v, a) : weights_->forward(nv, a);
        const State ns = gated ? state_of(nv, mask | constraints_.gate_bits[nv])
                               : static_cast<State>(nv);
        if (settled_[ns]) continue;
        const double nd = du + w;
        if (nd < dist_[ns]) {
          if (dist_[ns] == kInfinity) touched_.push_back(ns);
          dist_[ns] = nd;
          pred_[ns] = s;
          heap_.emplace_back(nd, ns);
          std::push_heap(heap_.begin(), heap_.end(), after);
        } else if (nd == dist_[ns] && s < pred_[ns]) {
          pred_[ns] = s;
        }
      }
    }
  }
  for (State t : marked) target_mark_[t] = 0;
}

double ShortestPathSearch::distance(const LatticePoint& p) const {
  const BoxRegion& box = weights_->box();
  if (!box.contains(p)) return kInfinity;
  const State s = state_of(box.index_of(p), full_mask_);
  return settled_[s] ? dist_[s] : kInfinity;
}

PathResult ShortestPathSearch::path_to(const LatticePoint& p) const {
  PathResult r;
  const BoxRegion& box = weights_->box();
  if (!box.contains(p)) return r;
  State s = state_of(box.index_of(p), full_mask_);
  if (!settled_[s]) return r;
  r.feasible = true;
  r.time = dist_[s];
  for (; s != kNone; s = pred_[s]) {
    const LatticePoint q = box.point_at(s / layers_);
    r.touched_boundary = r.touched_boundary || box.on_boundary(q);
    r.vertices.push_back(q);
  }
  std::reverse(r.vertices.begin(), r.vertices.end());
  return r;
}

PathResult passage_time(const BoxWeights& weights, const LatticePoint& x,
                        const LatticePoint& y) {
  require_in_box(weights.box(), x, "endpoint");
  require_in_box(weights.box(), y, "endpoint");
  // The smaller endpoint is always the source, so tau(x,y) and tau(y,x) sum
  // the same weights in the same order.
  ShortestPathSearch search(weights);
  return canonical_search(search, x, y);
}

PathResult passage_time(const Environment& env, const LatticePoint& x,
                        const LatticePoint& y, const BoxRegion& box) {
  require_in_box(box, x, "endpoint");
  require_in_box(box, y, "endpoint");
  BoxWeights weights(env, box);
  return passage_time(weights, x, y);
}

PathResult restricted_passage_time(const BoxWeights& weights,
                                   const LatticePoint& x, const LatticePoint& y,
                                   const CylinderRegion& region) {
  const BoxRegion& box = weights.box();
  require_in_box(box, x, "endpoint");
  require_in_box(box, y, "endpoint");
  if (!region.contains(x) || !region.contains(y)) {
    throw std::invalid_argument("restricted endpoints must lie in the region");
  }
  std::vector<std::uint8_t> allowed(box.num_vertices(), 0);
  // Only scan the part of the box that can intersect the region.
  const BoxRegion cyl = region.bounding_box();
  LatticePoint lo = box.lo();
  LatticePoint hi = box.hi();
  for (int a = 0; a < box.dim(); ++a) {
    lo[a] = std::max(lo[a], cyl.lo()[a]);
    hi[a] = std::min(hi[a], cyl.hi()[a]);
    if (lo[a] > hi[a]) return PathResult{};
  }
  const BoxRegion scan(lo, hi);
  for (std::size_t i = 0; i < scan.num_vertices(); ++i) {
    const LatticePoint p = scan.point_at(i);
    if (region.contains(p)) allowed[box.index_of(p)] = 1;
  }
  SearchConstraints c;
  c.allowed = allowed;
  ShortestPathSearch search(weights, c);
  return canonical_search(search, x, y);
}

PathResult restricted_passage_time(const Environment& env, const LatticePoint& x,
                                   const LatticePoint& y,
                                   const CylinderRegion& region,
                                   const BoxRegion& box) {
  BoxWeights weights(env, box);
  return restricted_passage_time(weights, x, y, region);
}

PathResult crossing_passage_time(const BoxWeights& weights,
                                 const LatticePoint& a, const LatticePoint& b,
                                 std::span<const GateSet> gates) {
  const BoxRegion& box = weights.box();
  require_in_box(box, a, "endpoint");
  require_in_box(box, b, "endpoint");
  if (gates.size() > static_cast<std::size_t>(kMaxGates)) {
    throw std::invalid_argument("at most " + std::to_string(kMaxGates) +
                                " gates are supported");
  }
  std::vector<std::uint8_t> bits(box.num_vertices(), 0);
  for (std::size_t g = 0; g < gates.size(); ++g) {
    bool any = false;
    for (const LatticePoint& p : gates[g]) {
      if (!box.contains(p)) continue;
      bits[box.index_of(p)] |= static_cast<std::uint8_t>(1u << g);
      any = true;
    }
    if (!any) return PathResult{};
  }
  SearchConstraints c;
  c.gate_bits = bits;
  c.num_gates = static_cast<int>(gates.size());
  ShortestPathSearch search(weights, c);
  return canonical_search(search, a, b);
}

PathResult crossing_passage_time(const Environment& env, const LatticePoint& a,
                                 const LatticePoint& b,
                                 std::span<const GateSet> gates,
                                 const BoxRegion& box) {
  BoxWeights weights(env, box);
  return crossing_passage_time(weights, a, b, gates);
}

double max_transversal_deviation(const PathResult& path, const LatticePoint& x,
                                 const LatticePoint& y) {
  if (!path.feasible || path.vertices.empty()) {
    throw std::invalid_argument("transversal deviation of an infeasible path");
  }
  const RealVector a = x.to_real();
  const RealVector b = y.to_real();
  double best = 0.0;
  for (const LatticePoint& v : path.vertices) {
    best = std::max(best, euclidean_distance_to_segment(v.to_real(), a, b));
  }
  return best;
}

double brute_force_passage_time(const Environment& env, const LatticePoint& x,
                                const LatticePoint& y, const BoxRegion& box) {
  if (box.num_vertices() > kBruteForceMaxVertices) {
    throw std::invalid_argument("brute force is limited to " +
                                std::to_string(kBruteForceMaxVertices) +
                                " vertices");
  }
  require_in_box(box, x, "endpoint");
  require_in_box(box, y, "endpoint");
  const std::size_t n = box.num_vertices();
  std::vector<LatticePoint> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = box.point_at(i);
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (are_neighbors(pts[i], pts[j])) {
        const double w = env.edge_weight(pts[i], pts[j]);
        adj[i].emplace_back(j, w);
        adj[j].emplace_back(i, w);
      }
    }
  }
  const std::size_t target = box.index_of(y);
  double best = kInfinity;
  std::uint32_t visited = 0;
  auto dfs = [&](auto&& self, std::size_t u, double acc) -> void {
    if (u == target) {
      best = std::min(best, acc);
      return;
    }
    visited |= 1u << u;
    for (const auto& [v, w] : adj[u]) {
      if (!(visited & (1u << v))) self(self, v, acc + w);
    }
    visited &= ~(1u << u);
  };
  dfs(dfs, box.index_of(x), 0.0);
  return best;
}

double path_weight(const Environment& env, std::span<const LatticePoint> vertices) {
  double s = 0.0;
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    s += env.edge_weight(vertices[i - 1], vertices[i]);
  }
  return s;
}

int standard_margin(double scale) {
  return std::max(static_cast<int>(std::ceil(4.0 * std::pow(scale, 0.8))), 16);
}

ScaledPathResult passage_time_at_scale(const Environment& env,
                                       const LatticePoint& x,
                                       const LatticePoint& y, double scale) {
  const LatticePoint ends[] = {x, y};
  const BoxRegion base = BoxRegion::bounding(ends);
  int margin = standard_margin(scale);
  ScaledPathResult r;
  for (int attempt = 0;; ++attempt) {
    r.box = base.inflated(margin);
    r.path = passage_time(env, x, y, r.box);
    r.retries = attempt;
    if (!r.path.touched_boundary) break;
    if (attempt == 2) {
      r.truncation_warning = true;
      break;
    }
    margin *= 2;
  }
  return r;
}

}  // namespace fpplab
