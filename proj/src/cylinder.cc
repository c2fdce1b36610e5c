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

#include "fpplab/cylinder.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

#include "fpplab/errors.h"
#include "fpplab/exponents.h"
#include "fpplab/parallel.h"
#include "fpplab/stats.h"

namespace fpplab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::string_view kCylinderId = "cylinder";

int ceil_int(double x) { return static_cast<int>(std::ceil(x - 1e-12)); }

RealVector unit_real(int dim, int axis) {
  RealVector v(dim, 0.0);
  v[axis] = 1.0;
  return v;
}

// Smallest box containing both.
BoxRegion hull(const BoxRegion& a, const BoxRegion& b) {
  LatticePoint lo = a.lo();
  LatticePoint hi = a.hi();
  for (int k = 0; k < a.dim(); ++k) {
    lo[k] = std::min(lo[k], b.lo()[k]);
    hi[k] = std::max(hi[k], b.hi()[k]);
  }
  return BoxRegion(lo, hi);
}

// Members of `region` whose coordinate `axis` equals `pos`.
std::vector<LatticePoint> slab_points(const CylinderRegion& region, int axis, int pos) {
  const BoxRegion bb = region.bounding_box();
  LatticePoint lo = bb.lo();
  LatticePoint hi = bb.hi();
  lo[axis] = pos;
  hi[axis] = pos;
  const BoxRegion scan(lo, hi);
  std::vector<LatticePoint> out;
  for (std::size_t i = 0; i < scan.num_vertices(); ++i) {
    const LatticePoint p = scan.point_at(i);
    if (region.contains(p)) out.push_back(p);
  }
  return out;
}

bool le_tol(double a, double b, double rel_tol) {
  return a <= b + rel_tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Standard deviation of `statistic` over paired resamples of n items.
double paired_bootstrap(std::size_t n, std::uint64_t seed,
                        const std::function<double(const std::vector<std::size_t>&)>& statistic) {
  std::vector<double> values;
  std::vector<std::size_t> idx(n);
  for (int r = 0; r < kDefaultBootstrapResamples; ++r) {
    for (std::size_t i = 0; i < n; ++i) idx[i] = bootstrap_index(seed, r, i, n);
    const double v = statistic(idx);
    if (std::isfinite(v)) values.push_back(v);
  }
  return values.size() >= 2 ? std::sqrt(sample_variance(values)) : 0.0;
}

std::vector<double> pick(std::span<const double> xs, const std::vector<std::size_t>& idx) {
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = xs[idx[i]];
  return out;
}

double fourth_norm(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x * x * x * x);
  return std::sqrt(std::sqrt(acc.value() / static_cast<double>(xs.size())));
}

struct PerturbationSides {
  double left, right, escape;
};

PerturbationSides perturbation_sides(std::span<const double> x, std::span<const double> y,
                                     std::span<const std::uint8_t> b) {
  std::size_t escapes = 0;
  for (auto v : b) escapes += !v;
  const double p = static_cast<double>(escapes) / static_cast<double>(b.size());
  const double s = fourth_norm(x) + fourth_norm(y);
  return {std::abs(population_variance(x) - population_variance(y)),
          s * s * std::sqrt(std::sqrt(p)), p};
}

}  // namespace

std::string_view to_string(MeasurementLevel level) {
  switch (level) {
    case MeasurementLevel::kPlain: return "plain";
    case MeasurementLevel::kRestricted: return "restricted";
    case MeasurementLevel::kFull: return "full";
  }
  return "unknown";
}

MeasurementLevel measurement_level_from_string(std::string_view name) {
  if (name == "plain") return MeasurementLevel::kPlain;
  if (name == "restricted") return MeasurementLevel::kRestricted;
  if (name == "full") return MeasurementLevel::kFull;
  throw std::invalid_argument("unknown measurement level '" + std::string(name) + "'");
}

void CylinderExperimentConfig::validate() const {
  if (dim < 2 || dim > kMaxDim) {
    throw std::invalid_argument(fmt::format("dimension must be in [2, {}]", kMaxDim));
  }
  if (direction_axis < 0 || direction_axis >= dim || transverse_axis < 0 ||
      transverse_axis >= dim || direction_axis == transverse_axis) {
    throw std::invalid_argument("direction and transverse axes must be distinct axes");
  }
  if (n < 4) throw std::invalid_argument("n must be at least 4");
  if (!(xi_prime > 0.0 && xi_prime < 1.0)) {
    throw std::invalid_argument("xi' must lie in (0, 1)");
  }
  if (!(beta > xi_prime && beta < 1.0)) {
    throw std::invalid_argument("beta must lie in (xi', 1)");
  }
  if (!(shift_multiplier > 0.0) || !(outer_radius_multiplier > 0.0)) {
    throw std::invalid_argument("multipliers must be positive");
  }
  distribution.check_well_formed();
  const double r = std::pow(static_cast<double>(n), xi_prime);
  if (!(ceil_int(shift_multiplier * r) > 2 * ceil_int(r))) {
    throw std::invalid_argument(fmt::format(
        "cylinders overlap: shift {} does not exceed twice the radius {}",
        ceil_int(shift_multiplier * r), ceil_int(r)));
  }
}

CylinderGeometry CylinderGeometry::build(const CylinderExperimentConfig& config) {
  config.validate();
  const int d = config.dim;
  const int a0 = config.direction_axis;
  const int a1 = config.transverse_axis;
  const double nd = config.n;
  const double r = std::pow(nd, config.xi_prime);

  CylinderGeometry g;
  g.n = config.n;
  g.radius = ceil_int(r);
  g.shift = ceil_int(config.shift_multiplier * r);
  g.outer_radius = std::max(ceil_int(config.outer_radius_multiplier * r), g.radius + g.shift);
  // H1 must precede H2; n^beta >= n/2 happens at small n.
  const int h1_raw = ceil_int(std::pow(nd, config.beta));
  const int h1_cap = (config.n + 1) / 2 - 1;
  g.h1 = std::min(h1_raw, h1_cap);
  g.h1_clamped = h1_raw > h1_cap;
  g.h2 = config.n - g.h1;

  const LatticePoint e0 = LatticePoint::unit(d, a0);
  const LatticePoint e1 = LatticePoint::unit(d, a1);
  g.start1 = LatticePoint::origin(d);
  g.end1 = e0 * config.n;
  g.start2 = e1 * g.shift;
  g.end2 = g.end1 + g.start2;

  const RealVector dir = unit_real(d, a0);
  g.c1 = CylinderRegion(g.start1.to_real(), dir, nd, g.radius);
  g.c2 = CylinderRegion(g.start2.to_real(), dir, nd, g.radius);
  g.outer = CylinderRegion(g.start1.to_real(), dir, nd, g.outer_radius);

  const BoxRegion pair = hull(g.c1.bounding_box(), g.c2.bounding_box());
  g.box = hull(pair.inflated(standard_margin(nd)), g.outer.bounding_box());

  const int pos[4] = {0, g.h1, g.h2, config.n};
  for (int i = 0; i < 4; ++i) g.slab[i] = slab_points(g.outer, a0, pos[i]);
  for (int i : {1, 2}) {
    GateSet& gate = i == 1 ? g.gate1 : g.gate2;
    for (const LatticePoint& p : g.slab[i]) {
      if (g.c1.contains(p) || g.c2.contains(p)) gate.push_back(p);
    }
  }
  g.gate_mask.assign(g.box.num_vertices(), 0);
  for (const LatticePoint& p : g.gate1) g.gate_mask[g.box.index_of(p)] |= 1;
  for (const LatticePoint& p : g.gate2) g.gate_mask[g.box.index_of(p)] |= 2;
  return g;
}

double crossing_fluctuation_all_pairs(const BoxWeights& weights,
                                      std::span<const LatticePoint> lo,
                                      std::span<const LatticePoint> hi) {
  if (lo.empty() || hi.empty()) throw std::invalid_argument("crossing sets must be nonempty");
  const bool swap = hi.size() < lo.size();
  const auto sources = swap ? hi : lo;
  const auto targets = swap ? lo : hi;
  ShortestPathSearch search(weights);
  double best = -kInfinity, worst = kInfinity;
  for (const LatticePoint& v : sources) {
    search.run(v, targets);
    for (const LatticePoint& w : targets) {
      const double t = search.distance(w);
      best = std::max(best, t);
      worst = std::min(worst, t);
    }
  }
  return best - worst;
}

double crossing_fluctuation(const BoxWeights& weights, std::span<const LatticePoint> lo,
                            std::span<const LatticePoint> hi) {
  if (lo.empty() || hi.empty()) throw std::invalid_argument("crossing sets must be nonempty");
  const bool swap = hi.size() < lo.size();
  const auto sources = swap ? hi : lo;
  const auto targets = swap ? lo : hi;
  ShortestPathSearch search(weights);

  search.run(sources, targets);
  double lowest = kInfinity;
  for (const LatticePoint& w : targets) lowest = std::min(lowest, search.distance(w));

  // ecc(v') <= tau(v', v) + ecc(v) bounds every unprocessed source.
  std::vector<LatticePoint> all(targets.begin(), targets.end());
  all.insert(all.end(), sources.begin(), sources.end());
  const std::size_t m = sources.size();
  std::vector<double> bound(m, kInfinity);
  std::vector<std::uint8_t> done(m, 0);
  double highest = -kInfinity;
  for (std::size_t step = 0; step < m; ++step) {
    std::size_t pick_i = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (!done[i] && (pick_i == m || bound[i] > bound[pick_i])) pick_i = i;
    }
    if (step > 0 &&
        bound[pick_i] < highest - 1e-9 * std::max(1.0, std::abs(highest))) {
      break;
    }
    search.run(sources[pick_i], all);
    double ecc = -kInfinity;
    for (const LatticePoint& w : targets) ecc = std::max(ecc, search.distance(w));
    highest = std::max(highest, ecc);
    done[pick_i] = 1;
    for (std::size_t i = 0; i < m; ++i) {
      if (!done[i]) bound[i] = std::min(bound[i], search.distance(sources[i]) + ecc);
    }
  }
  return highest - lowest;
}

double crossing_fluctuation(const Environment& env, std::span<const LatticePoint> lo,
                            std::span<const LatticePoint> hi, const BoxRegion& box) {
  for (const auto& p : lo) {
    if (!box.contains(p)) throw std::invalid_argument("crossing set leaves the box");
  }
  for (const auto& p : hi) {
    if (!box.contains(p)) throw std::invalid_argument("crossing set leaves the box");
  }
  BoxWeights weights(env, box);
  return crossing_fluctuation(weights, lo, hi);
}

namespace {

void flag(CylinderReplicaRecord& r, std::string_view reason) {
  if (!r.flagged) r.flag_reason = std::string(reason);
  r.flagged = true;
}

// First gate-1 vertex on the path and the first gate-2 vertex after it.
bool crossing_vertices(const PathResult& path, const CylinderGeometry& g,
                       LatticePoint& a1, LatticePoint& a2) {
  std::size_t i = 0;
  const auto& vs = path.vertices;
  while (i < vs.size() && !(g.gate_mask[g.box.index_of(vs[i])] & 1)) ++i;
  if (i == vs.size()) return false;
  a1 = vs[i];
  while (i < vs.size() && !(g.gate_mask[g.box.index_of(vs[i])] & 2)) ++i;
  if (i == vs.size()) return false;
  a2 = vs[i];
  return true;
}

}  // namespace

CylinderReplicaRecord run_replica(const CylinderExperimentConfig& config,
                                  const CylinderGeometry& g, std::uint64_t replica) {
  CylinderReplicaRecord r;
  r.replica = replica;
  r.level = config.level;
  r.t1_restricted = r.t2_restricted = kNaN;
  r.t1_crossing = r.t2_crossing = kNaN;
  r.delta_restricted = r.delta_crossing = kNaN;
  r.x0 = r.x1 = kNaN;

  const Environment env(config.distribution,
                        derive_replica_seed(config.seed, kCylinderId, replica), config.dim);
  const BoxWeights weights(env, g.box);

  const PathResult p1 = passage_time(weights, g.start1, g.end1);
  const PathResult p2 = passage_time(weights, g.start2, g.end2);
  r.t1 = p1.time;
  r.t2 = p2.time;
  r.delta = r.t1 - r.t2;
  r.touched_boundary = p1.touched_boundary || p2.touched_boundary;
  if (config.level == MeasurementLevel::kPlain) {
    if (r.touched_boundary) flag(r, "touched_boundary");
    return r;
  }

  const PathResult q1 = restricted_passage_time(weights, g.start1, g.end1, g.c1);
  const PathResult q2 = restricted_passage_time(weights, g.start2, g.end2, g.c2);
  r.feasible = q1.feasible && q2.feasible;
  r.t1_restricted = q1.time;
  r.t2_restricted = q2.time;
  r.delta_restricted = r.t1_restricted - r.t2_restricted;
  r.b_restricted = r.t1 == r.t1_restricted && r.t2 == r.t2_restricted;

  if (config.level == MeasurementLevel::kFull) {
    const GateSet gates[] = {g.gate1, g.gate2};
    const PathResult c1 = crossing_passage_time(weights, g.start1, g.end1, gates);
    const PathResult c2 = crossing_passage_time(weights, g.start2, g.end2, gates);
    r.feasible = r.feasible && c1.feasible && c2.feasible;
    r.touched_boundary = r.touched_boundary || c1.touched_boundary || c2.touched_boundary;
    r.t1_crossing = c1.time;
    r.t2_crossing = c2.time;
    r.delta_crossing = r.t1_crossing - r.t2_crossing;
    r.b_crossing = r.t1 == r.t1_crossing && r.t2 == r.t2_crossing;
    if (c1.feasible && c2.feasible) {
      r.gate_order_ok = crossing_vertices(c2, g, r.a1, r.a2) &&
                        crossing_vertices(c1, g, r.a1_prime, r.a2_prime);
    }
    r.x0 = crossing_fluctuation(weights, g.slab[0], g.slab[1]);
    r.x1 = crossing_fluctuation(weights, g.slab[2], g.slab[3]);
  }

  if (!r.feasible) {
    flag(r, "infeasible");
  } else if (r.touched_boundary) {
    flag(r, "touched_boundary");
  } else if (!r.gate_order_ok) {
    flag(r, "gate_order");
  }
  return r;
}

CylinderReplicaRecord run_replica(const CylinderExperimentConfig& config,
                                  std::uint64_t replica) {
  return run_replica(config, CylinderGeometry::build(config), replica);
}

std::vector<CylinderReplicaRecord> run_replicas(const CylinderExperimentConfig& config,
                                                std::uint64_t first, std::size_t count,
                                                int workers) {
  const CylinderGeometry g = CylinderGeometry::build(config);
  std::vector<CylinderReplicaRecord> out(count);
  parallel_for(count, workers, [&](std::size_t i) { out[i] = run_replica(config, g, first + i); });
  return out;
}

std::vector<std::string> check_record_invariants(const CylinderReplicaRecord& r,
                                                 double rel_tol) {
  std::vector<std::string> bad;
  if (r.flagged) return bad;
  const auto need = [&](bool ok, std::string what) {
    if (!ok) bad.push_back(fmt::format("replica {}: {}", r.replica, what));
  };
  if (r.level == MeasurementLevel::kPlain) return bad;
  need(le_tol(r.t1, r.t1_restricted, rel_tol), "T1 > T1'");
  need(le_tol(r.t2, r.t2_restricted, rel_tol), "T2 > T2'");
  need(!r.b_restricted || r.delta == r.delta_restricted, "B_restricted but dT != dT'");
  if (r.level != MeasurementLevel::kFull) return bad;
  need(le_tol(r.t1, r.t1_crossing, rel_tol), "T1 > T1''");
  need(le_tol(r.t1_crossing, r.t1_restricted, rel_tol), "T1'' > T1'");
  need(le_tol(r.t2, r.t2_crossing, rel_tol), "T2 > T2''");
  need(le_tol(r.t2_crossing, r.t2_restricted, rel_tol), "T2'' > T2'");
  need(!r.b_crossing || r.delta == r.delta_crossing, "B_crossing but dT != dT''");
  need(le_tol(std::abs(r.delta_crossing), r.x0 + r.x1, rel_tol), "|dT''| > X0 + X1");
  need(r.x0 >= 0.0 && r.x1 >= 0.0, "negative crossing fluctuation");
  return bad;
}

PerturbationCheck verify_variance_perturbation(std::span<const double> x,
                                               std::span<const double> y,
                                               std::span<const std::uint8_t> b,
                                               std::uint64_t bootstrap_seed) {
  if (x.size() != y.size() || x.size() != b.size()) {
    throw std::invalid_argument("perturbation samples must be aligned");
  }
  if (x.empty()) throw InsufficientData("no samples");
  PerturbationCheck c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (b[i] && x[i] != y[i]) {
      c.precondition_ok = false;
      c.violating_index = static_cast<std::int64_t>(i);
      c.message = fmt::format("replica {}: X != Y on B ({} vs {})", i, x[i], y[i]);
      return c;
    }
  }
  const PerturbationSides s = perturbation_sides(x, y, b);
  c.left = s.left;
  c.right = s.right;
  c.escape_probability = s.escape;
  // The inequality holds exactly for the empirical law; the slack only
  // absorbs rounding.
  c.holds = c.left <= c.right * (1.0 + 1e-9) + 1e-12;
  std::vector<std::uint8_t> bb;
  c.left_stderr = paired_bootstrap(x.size(), bootstrap_seed, [&](const auto& idx) {
    return std::abs(population_variance(pick(x, idx)) - population_variance(pick(y, idx)));
  });
  c.right_stderr = paired_bootstrap(x.size(), bootstrap_seed, [&](const auto& idx) {
    bb.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) bb[i] = b[idx[i]];
    const auto xs = pick(x, idx);
    const auto ys = pick(y, idx);
    return perturbation_sides(xs, ys, bb).right;
  });
  c.message = fmt::format("left {:.6g} {} right {:.6g}", c.left, c.holds ? "<=" : ">", c.right);
  return c;
}

VarianceBoundsReport aggregate(std::span<const CylinderReplicaRecord> records,
                               std::uint64_t bootstrap_seed) {
  VarianceBoundsReport rep;
  if (records.empty()) throw InsufficientData("no replica records");
  std::map<std::string, std::size_t> reasons;
  std::vector<const CylinderReplicaRecord*> good;
  rep.level = records.front().level;
  for (const auto& r : records) {
    if (r.level != rep.level) {
      throw std::invalid_argument("records mix measurement levels");
    }
    if (r.flagged) {
      ++rep.flagged;
      ++reasons[r.flag_reason];
    } else {
      good.push_back(&r);
    }
  }
  rep.flag_reasons.assign(reasons.begin(), reasons.end());
  rep.records = good.size();
  const double flagged_fraction =
      static_cast<double>(rep.flagged) / static_cast<double>(records.size());
  if (flagged_fraction > kMaxFlaggedFraction) {
    throw UnreliableEstimate(fmt::format("{} of {} replicas flagged (limit 1%)", rep.flagged,
                                         records.size()));
  }
  if (good.size() < kMinAggregateRecords) {
    throw InsufficientData(fmt::format("{} unflagged records, at least {} required",
                                       good.size(), kMinAggregateRecords));
  }

  const auto column = [&](double CylinderReplicaRecord::*field) {
    std::vector<double> out;
    for (const auto* r : good) out.push_back(r->*field);
    return out;
  };
  const std::size_t n = good.size();
  const auto dt = column(&CylinderReplicaRecord::delta);
  const auto boot = [&](std::uint64_t salt, auto&& stat) {
    return paired_bootstrap(n, mix64(bootstrap_seed ^ salt), stat);
  };
  rep.var_delta = {sample_variance(dt),
                   boot(1, [&](const auto& idx) { return sample_variance(pick(dt, idx)); })};
  rep.var_delta_restricted = rep.twice_var_t1_restricted = rep.iid_gap = {kNaN, kNaN};
  rep.corr_restricted = rep.escape_probability = {kNaN, kNaN};
  rep.var_delta_crossing = rep.four_x0_second_moment = {kNaN, kNaN};

  if (rep.level != MeasurementLevel::kPlain) {
    const auto dtr = column(&CylinderReplicaRecord::delta_restricted);
    const auto t1r = column(&CylinderReplicaRecord::t1_restricted);
    const auto t2r = column(&CylinderReplicaRecord::t2_restricted);
    std::vector<std::uint8_t> b;
    for (const auto* r : good) b.push_back(r->b_restricted);

    rep.var_delta_restricted = {
        sample_variance(dtr),
        boot(2, [&](const auto& idx) { return sample_variance(pick(dtr, idx)); })};
    rep.twice_var_t1_restricted = {
        2.0 * sample_variance(t1r),
        boot(3, [&](const auto& idx) { return 2.0 * sample_variance(pick(t1r, idx)); })};
    const auto gap = [&](const auto& idx) {
      return sample_variance(pick(dtr, idx)) - 2.0 * sample_variance(pick(t1r, idx));
    };
    std::vector<std::size_t> identity(n);
    for (std::size_t i = 0; i < n; ++i) identity[i] = i;
    rep.iid_gap = {gap(identity), boot(4, gap)};
    rep.iid_identity_holds = std::abs(rep.iid_gap.value) <= 3.0 * rep.iid_gap.std_error;

    if (sample_variance(t1r) > 0.0 && sample_variance(t2r) > 0.0) {
      const double rho = correlation(t1r, t2r);
      rep.corr_restricted = {rho, correlation_stderr(rho, n)};
      rep.independence_holds = std::abs(rho) < 3.0 * rep.corr_restricted.std_error;
    } else {
      rep.corr_restricted = {0.0, 0.0};
      rep.warnings.push_back("restricted passage times have zero variance");
    }

    std::size_t escapes = 0;
    for (auto v : b) escapes += !v;
    const double p = static_cast<double>(escapes) / static_cast<double>(n);
    rep.escape_probability = {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
    rep.perturbation = verify_variance_perturbation(dt, dtr, b, mix64(bootstrap_seed ^ 5));
    if (!rep.perturbation.precondition_ok) {
      rep.warnings.push_back("perturbation hypothesis violated: " + rep.perturbation.message);
    }
  }

  if (rep.level == MeasurementLevel::kFull) {
    const auto dtc = column(&CylinderReplicaRecord::delta_crossing);
    const auto x0 = column(&CylinderReplicaRecord::x0);
    const auto four_m2 = [&](const auto& idx) {
      CompensatedSum acc;
      for (auto i : idx) acc.add(x0[i] * x0[i]);
      return 4.0 * acc.value() / static_cast<double>(idx.size());
    };
    std::vector<std::size_t> identity(n);
    for (std::size_t i = 0; i < n; ++i) identity[i] = i;
    rep.var_delta_crossing = {
        sample_variance(dtc),
        boot(6, [&](const auto& idx) { return sample_variance(pick(dtc, idx)); })};
    rep.four_x0_second_moment = {four_m2(identity), boot(7, four_m2)};
    const auto margin = [&](const auto& idx) {
      return four_m2(idx) - sample_variance(pick(dt, idx));
    };
    const double slack = 2.0 * boot(8, margin);
    rep.upper_bound_holds = margin(identity) >= -slack;
  }
  return rep;
}

ScalingTable fit_variance_scaling(const std::vector<int>& n_grid,
                                  const std::vector<std::vector<double>>& deltas,
                                  std::uint64_t bootstrap_seed) {
  if (n_grid.size() != deltas.size()) {
    throw std::invalid_argument("one delta sample per n is required");
  }
  ScalingTable t;
  t.reference_lower = kNaN;
  t.reference_upper = kNaN;
  bool any_zero = false;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    ScalingRow row;
    row.n = n_grid[i];
    row.replicas = deltas[i].size();
    row.var_delta = {sample_variance(deltas[i]), variance_stderr(deltas[i])};
    any_zero = any_zero || !(row.var_delta.value > 0.0);
    t.rows.push_back(row);
  }
  if (any_zero) {
    t.degenerate = true;
    t.exponent = t.exponent_stderr = kNaN;
    t.warnings.push_back("Var dT vanishes at some n; no scaling fit");
    return t;
  }
  const ExponentEstimate est = fit_chi(n_grid, deltas, bootstrap_seed);
  t.exponent = 2.0 * est.value;
  t.exponent_stderr = 2.0 * est.std_error;
  for (const auto& w : est.warnings) t.warnings.push_back(w);
  return t;
}

ScalingTable sweep_n(const CylinderExperimentConfig& config_template,
                     const std::vector<int>& n_grid, int workers, double chi_estimate,
                     double chi_estimate_stderr) {
  check_geometric_grid(n_grid, 4);
  std::vector<std::vector<double>> deltas;
  std::vector<std::size_t> flagged;
  for (int n : n_grid) {
    CylinderExperimentConfig c = config_template;
    c.n = n;
    c.level = MeasurementLevel::kPlain;
    const auto records = run_replicas(c, 0, c.replicas, workers);
    std::vector<double> d;
    std::size_t f = 0;
    for (const auto& r : records) {
      if (r.flagged) {
        ++f;
      } else {
        d.push_back(r.delta);
      }
    }
    deltas.push_back(std::move(d));
    flagged.push_back(f);
  }
  ScalingTable t = fit_variance_scaling(n_grid, deltas, mix64(config_template.seed ^ 0x5eed));
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    t.rows[i].flagged = flagged[i];
    if (flagged[i] * 100 > config_template.replicas) {
      t.warnings.push_back(fmt::format("n={}: {} replicas flagged", n_grid[i], flagged[i]));
    }
  }
  t.reference_upper = 2.0 * (2.0 * config_template.xi_prime - config_template.beta);
  t.reference_lower = std::isfinite(chi_estimate) ? 2.0 * chi_estimate : kNaN;
  t.reference_lower_stderr = std::isfinite(chi_estimate) ? 2.0 * chi_estimate_stderr : kNaN;
  return t;
}

}  // namespace fpplab
