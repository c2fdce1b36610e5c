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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fpplab/errors.h"
#include "fpplab/exponents.h"
#include "fpplab/stats.h"

namespace fpplab {
namespace {

CylinderExperimentConfig make_config(int n, MeasurementLevel level,
                                     DistributionSpec spec = DistributionSpec::exponential(1.0)) {
  CylinderExperimentConfig c;
  c.n = n;
  c.level = level;
  c.distribution = spec;
  c.seed = 2026;
  return c;
}

TEST(Geometry, RoundedOnceAtDefaultScale) {
  const auto g = CylinderGeometry::build(make_config(64, MeasurementLevel::kFull));
  EXPECT_EQ(g.radius, 19);
  EXPECT_EQ(g.shift, 74);
  EXPECT_EQ(g.outer_radius, 93);
  // ceil(64^0.85) = 35 would put H1 after H2.
  EXPECT_TRUE(g.h1_clamped);
  EXPECT_EQ(g.h1, 31);
  EXPECT_EQ(g.h2, 33);
  for (const auto& s : g.slab) EXPECT_EQ(s.size(), 187u);
  EXPECT_EQ(g.gate1.size(), 78u);
  EXPECT_EQ(g.gate2.size(), 78u);
  EXPECT_EQ(g.start2, (LatticePoint{0, 74}));
  EXPECT_EQ(g.end2, (LatticePoint{64, 74}));

  const auto big = CylinderGeometry::build(make_config(128, MeasurementLevel::kFull));
  EXPECT_FALSE(big.h1_clamped);
  EXPECT_EQ(big.h1, 62);
  EXPECT_EQ(big.h2, 66);
}

TEST(Geometry, CylindersAreDisjoint) {
  for (int n : {8, 32, 64, 128}) {
    const auto g = CylinderGeometry::build(make_config(n, MeasurementLevel::kFull));
    const BoxRegion bb = g.c1.bounding_box();
    for (std::size_t i = 0; i < bb.num_vertices(); ++i) {
      const LatticePoint p = bb.point_at(i);
      EXPECT_FALSE(g.c1.contains(p) && g.c2.contains(p)) << p.to_string();
    }
    for (const auto& s : g.slab) {
      for (const auto& p : s) EXPECT_TRUE(g.box.contains(p));
    }
  }
}

TEST(Geometry, RejectsBadConfig) {
  auto c = make_config(64, MeasurementLevel::kFull);
  c.beta = 0.6;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = make_config(64, MeasurementLevel::kFull);
  c.transverse_axis = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = make_config(64, MeasurementLevel::kFull);
  c.shift_multiplier = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = make_config(64, MeasurementLevel::kFull);
  c.xi_prime = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Replica, UnitWeightsAreDeterministic) {
  const auto c = make_config(16, MeasurementLevel::kFull, DistributionSpec::constant(1.0));
  const auto g = CylinderGeometry::build(c);
  const auto r = run_replica(c, g, 0);
  EXPECT_FALSE(r.flagged) << r.flag_reason;
  for (double t : {r.t1, r.t2, r.t1_restricted, r.t2_restricted, r.t1_crossing, r.t2_crossing}) {
    EXPECT_EQ(t, 16.0);
  }
  EXPECT_EQ(r.delta, 0.0);
  EXPECT_EQ(r.delta_restricted, 0.0);
  EXPECT_EQ(r.delta_crossing, 0.0);
  EXPECT_TRUE(r.b_restricted);
  EXPECT_TRUE(r.b_crossing);
  // l1 distances between slabs: h + |dy| ranges over [h, h + 2 R_C].
  EXPECT_EQ(g.outer_radius, 35);
  EXPECT_EQ(r.x0, 2.0 * g.outer_radius);
  EXPECT_EQ(r.x1, 2.0 * g.outer_radius);
  EXPECT_TRUE(check_record_invariants(r).empty());
}

TEST(Replica, PathwiseChainHolds) {
  const auto c = make_config(24, MeasurementLevel::kFull);
  const auto records = run_replicas(c, 0, 25);
  std::size_t flagged = 0;
  for (const auto& r : records) {
    flagged += r.flagged;
    for (const auto& msg : check_record_invariants(r)) ADD_FAILURE() << msg;
    if (!r.flagged) {
      EXPECT_LE(std::abs(r.delta_crossing), r.x0 + r.x1);
      EXPECT_GE(r.a1[0], 0);
    }
  }
  EXPECT_LE(flagged, 1u);
}

TEST(Replica, IndependentOfWorkerCount) {
  const auto c = make_config(16, MeasurementLevel::kFull);
  const auto a = run_replicas(c, 3, 6, 1);
  const auto b = run_replicas(c, 3, 6, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].replica, 3 + i);
    EXPECT_EQ(a[i].t1, b[i].t1);
    EXPECT_EQ(a[i].t2_crossing, b[i].t2_crossing);
    EXPECT_EQ(a[i].x0, b[i].x0);
  }
}

TEST(Replica, WiderCylindersCoupleMoreOften) {
  // T1 <= T1'(wide) <= T1'(narrow), so coupling at a narrow radius implies
  // coupling at a wider one on the same environment.
  std::vector<std::vector<CylinderReplicaRecord>> runs;
  for (double xp : {0.6, 0.7, 0.8}) {
    auto c = make_config(32, MeasurementLevel::kRestricted);
    c.xi_prime = xp;
    runs.push_back(run_replicas(c, 0, 40));
  }
  std::size_t escapes[3] = {0, 0, 0};
  for (std::size_t i = 0; i < 40; ++i) {
    for (int k = 0; k < 3; ++k) escapes[k] += !runs[k][i].b_restricted;
    for (int k = 0; k + 1 < 3; ++k) {
      if (runs[k][i].b_restricted) EXPECT_TRUE(runs[k + 1][i].b_restricted) << i;
    }
  }
  EXPECT_GE(escapes[0], escapes[1]);
  EXPECT_GE(escapes[1], escapes[2]);
}

TEST(CrossingFluctuation, SmallExamples) {
  const Environment unit(DistributionSpec::constant(1.0), 1, 2);
  const BoxRegion box({-2, -2}, {6, 4});
  const std::vector<LatticePoint> v = {{0, 0}}, w = {{3, 1}};
  EXPECT_EQ(crossing_fluctuation(unit, v, w, box), 0.0);
  const std::vector<LatticePoint> lo = {{0, 0}, {0, 2}}, hi = {{4, 0}, {4, 2}};
  EXPECT_EQ(crossing_fluctuation(unit, lo, hi, box), 2.0);
  EXPECT_THROW(crossing_fluctuation(unit, {}, hi, box), std::invalid_argument);
}

TEST(CrossingFluctuation, MatchesAllPairsEnumeration) {
  const BoxRegion box({0, 0}, {5, 5});
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Environment env(DistributionSpec::exponential(1.0), seed, 2);
    std::vector<LatticePoint> lo, hi;
    for (int y = 0; y < 6; ++y) {
      lo.push_back({0, y});
      hi.push_back({5, y});
    }
    double best = -1, worst = 1e300;
    for (const auto& a : lo) {
      for (const auto& b : hi) {
        const double t = passage_time(env, a, b, box).time;
        best = std::max(best, t);
        worst = std::min(worst, t);
      }
    }
    const BoxWeights weights(env, box);
    EXPECT_EQ(crossing_fluctuation(weights, lo, hi), best - worst);
    EXPECT_EQ(crossing_fluctuation_all_pairs(weights, lo, hi), best - worst);
  }
}

TEST(CrossingFluctuation, PrunedEqualsReference) {
  std::mt19937_64 rng(8);
  const BoxRegion box({-20, -20}, {40, 40});
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Environment env(seed % 2 ? DistributionSpec::exponential(1.0)
                                   : DistributionSpec::uniform(0.5, 1.5),
                          seed, 2);
    std::uniform_int_distribution<int> coord(-15, 35);
    std::vector<LatticePoint> lo, hi;
    for (int i = 0; i < 25; ++i) lo.push_back({coord(rng), coord(rng)});
    for (int i = 0; i < 30; ++i) hi.push_back({coord(rng), coord(rng)});
    const BoxWeights weights(env, box);
    EXPECT_EQ(crossing_fluctuation(weights, lo, hi),
              crossing_fluctuation_all_pairs(weights, lo, hi));
  }
}

TEST(Perturbation, TwoPointClosedForm) {
  std::vector<double> x(16, 0.0), y(16, 0.0);
  std::vector<std::uint8_t> b(16, 1);
  x[15] = 4.0;
  b[15] = 0;
  const auto c = verify_variance_perturbation(x, y, b);
  EXPECT_TRUE(c.precondition_ok);
  EXPECT_EQ(c.left, 0.9375);
  EXPECT_EQ(c.right, 2.0);
  EXPECT_EQ(c.escape_probability, 1.0 / 16.0);
  EXPECT_TRUE(c.holds);
}

TEST(Perturbation, TrivialCases) {
  const std::vector<double> x = {1.0, 2.0, 5.0};
  const std::vector<std::uint8_t> none = {0, 0, 0}, all = {1, 1, 1};
  const auto same = verify_variance_perturbation(x, x, none);
  EXPECT_EQ(same.left, 0.0);
  EXPECT_TRUE(same.holds);
  const auto always = verify_variance_perturbation(x, x, all);
  EXPECT_EQ(always.left, 0.0);
  EXPECT_EQ(always.right, 0.0);
  EXPECT_TRUE(always.holds);
  const std::vector<double> y = {1.0, 2.5, 5.0};
  const auto broken = verify_variance_perturbation(x, y, all);
  EXPECT_FALSE(broken.precondition_ok);
  EXPECT_EQ(broken.violating_index, 1);
}

TEST(Aggregate, UnitWeightsGiveZeroVariances) {
  const auto c = make_config(8, MeasurementLevel::kFull, DistributionSpec::constant(1.0));
  const auto records = run_replicas(c, 0, 100);
  const auto rep = aggregate(records);
  EXPECT_EQ(rep.records, 100u);
  EXPECT_EQ(rep.var_delta.value, 0.0);
  EXPECT_EQ(rep.var_delta_restricted.value, 0.0);
  EXPECT_EQ(rep.var_delta_crossing.value, 0.0);
  EXPECT_EQ(rep.escape_probability.value, 0.0);
  EXPECT_TRUE(rep.upper_bound_holds);
  EXPECT_TRUE(rep.iid_identity_holds);
  EXPECT_TRUE(rep.perturbation.holds);
  EXPECT_EQ(rep.perturbation.left, 0.0);
}

TEST(Aggregate, RefusesThinOrFlaggedInput) {
  std::vector<CylinderReplicaRecord> few(99);
  EXPECT_THROW(aggregate(few), InsufficientData);
  std::vector<CylinderReplicaRecord> many(200);
  many[0].flagged = many[1].flagged = many[2].flagged = true;
  EXPECT_THROW(aggregate(many), UnreliableEstimate);
  many[2].flagged = false;
  EXPECT_NO_THROW(aggregate(many));
}

TEST(Aggregate, RestrictedTimesLookIndependent) {
  const auto c = make_config(16, MeasurementLevel::kFull);
  const auto records = run_replicas(c, 0, 200);
  const auto rep = aggregate(records, 4);
  EXPECT_TRUE(rep.independence_holds) << rep.corr_restricted.value;
  EXPECT_TRUE(rep.upper_bound_holds);
  EXPECT_TRUE(rep.perturbation.precondition_ok);
  EXPECT_TRUE(rep.perturbation.holds);
  EXPECT_GE(rep.escape_probability.value, 0.0);
  EXPECT_LE(rep.escape_probability.value, 1.0);

  std::vector<double> x0, x1;
  for (const auto& r : records) {
    x0.push_back(r.x0);
    x1.push_back(r.x1);
  }
  EXPECT_LT(ks_two_sample_statistic(x0, x1),
            ks_two_sample_critical_value(0.01, x0.size(), x1.size()));
}

TEST(Scaling, SyntheticExponentRecovered) {
  const std::vector<int> grid = {32, 48, 64, 96, 128};
  const auto s = synthetic_power_law_samples(grid, 0.6, SyntheticKind::kVariance, 500, 0.0, 3);
  const auto t = fit_variance_scaling(grid, s, 3);
  EXPECT_FALSE(t.degenerate);
  EXPECT_NEAR(t.exponent, 0.6, 0.02);
}

TEST(Scaling, UnitWeightsAreDegenerate) {
  auto c = make_config(8, MeasurementLevel::kPlain, DistributionSpec::constant(1.0));
  c.replicas = 5;
  const auto t = sweep_n(c, {8, 12, 16, 24});
  EXPECT_TRUE(t.degenerate);
  EXPECT_TRUE(std::isnan(t.exponent));
  EXPECT_NEAR(t.reference_upper, 2.0 * (1.4 - 0.85), 1e-12);
  EXPECT_THROW(sweep_n(c, {8, 16, 32}), std::invalid_argument);
}

}  // namespace
}  // namespace fpplab
