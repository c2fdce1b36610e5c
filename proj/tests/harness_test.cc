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

#include "fpplab/harness.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "fpplab/errors.h"
#include "fpplab/stats.h"

namespace fpplab {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh scratch directory per test.
fs::path scratch() {
  const auto* info = testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::temp_directory_path() /
                       fmt::format("fpplab_{}_{}_{}", info->test_suite_name(), info->name(),
                                   ::getpid());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig small_cylinder(std::size_t replicas = 120) {
  return parse_config(Json{{"experiment", "cylinder"},
                           {"seed", "77"},
                           {"n", 16},
                           {"replicas", replicas},
                           {"cylinder", {{"level", "restricted"}}}});
}

RunOptions quiet() { return RunOptions{}; }

void expect_same_tables(const fs::path& a, const fs::path& b) {
  EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json"));
  EXPECT_EQ(slurp(a / "cylinder.csv"), slurp(b / "cylinder.csv"));
  EXPECT_EQ(slurp(a / "summary.txt"), slurp(b / "summary.txt"));
}

TEST(Config, ZeroReplicasIsRejected) {
  try {
    parse_config(Json{{"experiment", "cylinder"}, {"replicas", 0}});
    FAIL() << "replicas = 0 accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "/replicas");
  }
}

TEST(Config, ErrorsNameTheField) {
  const auto path_of = [](const Json& doc) {
    try {
      parse_config(doc);
    } catch (const ConfigError& e) {
      return e.path();
    }
    return std::string("accepted");
  };
  EXPECT_EQ(path_of(Json{{"experiment", "chi"}, {"bogus", 1}}), "/bogus");
  EXPECT_EQ(path_of(Json{{"experiment", "nope"}}), "/experiment");
  EXPECT_EQ(path_of(Json::object()), "/experiment");
  EXPECT_EQ(path_of(Json{{"experiment", "chi"}, {"n_grid", {16, 32, 64}}}), "/n_grid");
  EXPECT_EQ(path_of(Json{{"experiment", "chi"}, {"n_grid", {16, "x"}}}), "/n_grid/1");
  EXPECT_EQ(path_of(Json{{"experiment", "cylinder"},
                         {"distribution", {{"kind", "exponential"}, {"params", {{"rate", -1}}}}}}),
            "/distribution");
  // A point mass at 0 with probability 1/2 reaches p_c in two dimensions.
  EXPECT_EQ(path_of(Json::parse(R"({"experiment": "cylinder", "distribution": {
                "kind": "discrete", "params": {"atoms": [{"value": 0, "probability": 0.5},
                                                         {"value": 1, "probability": 0.5}]}}})")),
            "/distribution");
  EXPECT_EQ(path_of(Json{{"experiment", "cylinder"}, {"cylinder", {{"beta", 0.5}}}}),
            "/cylinder");
  EXPECT_EQ(path_of(Json{{"experiment", "cylinder"}, {"cylinder", {{"level", "max"}}}}),
            "/cylinder/level");
  EXPECT_EQ(path_of(Json{{"experiment", "kappa"}, {"shard", {{"count", 2}}}}), "/shard");
  EXPECT_EQ(path_of(Json{{"experiment", "kappa"}, {"offsets", {0.01, 0.5}}}), "/offsets/1");
  EXPECT_EQ(path_of(Json{{"experiment", "kappa"}, {"n", 16}}), "/n");
  EXPECT_EQ(path_of(Json{{"experiment", "shape"}, {"direction", {1, 0, 0}}}), "/direction");
  EXPECT_EQ(path_of(Json{{"experiment", "sweep"}}), "accepted");
}

TEST(Config, DefaultReplicasKeyword) {
  const auto c = parse_config(Json{{"experiment", "xi"}, {"replicas", "default"}});
  EXPECT_EQ(c.replicas, 0u);
  EXPECT_EQ(config_to_json(c).at("replicas"), "default");
  EXPECT_THROW(parse_config(Json{{"experiment", "cylinder"}, {"replicas", "default"}}),
               ConfigError);
}

TEST(Config, SnapshotRoundTripsAndHashIgnoresScheduling) {
  ExperimentConfig c = small_cylinder();
  const ExperimentConfig back = parse_config(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  const std::string h = config_hash(c);
  c.workers = 8;
  c.shard_first = 10;
  c.shard_count = 5;
  EXPECT_EQ(config_hash(c), h);
  c.xi_prime = 0.71;
  EXPECT_NE(config_hash(c), h);
}

TEST(Config, SchemaMatchesParser) {
  const Json schema = Json::parse(slurp(fs::path(FPPLAB_SOURCE_DIR) / "schema/config.schema.json"));
  std::set<std::string> keys;
  for (const auto& [k, v] : schema.at("properties").items()) keys.insert(k);
  Json doc = {{"experiment", "cylinder"}};
  for (const auto& k : keys) {
    if (k == "experiment") continue;
    // Every schema property is a known field (a bad value fails, never "unknown").
    try {
      Json probe = doc;
      probe[k] = nullptr;
      parse_config(probe);
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.path().rfind("/" + k, 0), 0u) << k << ": " << e.what();
    }
  }
  const auto snapshot = config_to_json(small_cylinder());
  for (const auto& [k, v] : snapshot.items()) EXPECT_TRUE(keys.count(k)) << k;
}

TEST(Config, ShippedConfigsValidate) {
  int seen = 0;
  for (const auto& e : fs::directory_iterator(fs::path(FPPLAB_SOURCE_DIR) / "configs")) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(e.path())) << e.path();
    ++seen;
  }
  EXPECT_GE(seen, 5);
}

TEST(Serialize, SeedsKeepSixtyFourBits) {
  const std::uint64_t big = std::numeric_limits<std::uint64_t>::max();
  EXPECT_EQ(seed_to_string(big), "18446744073709551615");
  EXPECT_EQ(seed_from_json(Json(seed_to_string(big))), big);
  EXPECT_EQ(seed_from_json(Json(42)), 42u);
  EXPECT_THROW(seed_from_json(Json("-1")), std::exception);
  EXPECT_THROW(seed_from_json(Json("18446744073709551616")), std::exception);
}

TEST(Serialize, DistributionsRoundTrip) {
  const DistributionSpec specs[] = {
      DistributionSpec::exponential(2.5), DistributionSpec::uniform(0.5, 3.0),
      DistributionSpec::gamma(2.0, 0.25),
      DistributionSpec::discrete({{1.0, 0.25}, {2.0, 0.75}})};
  for (const auto& s : specs) {
    const Json j = s;
    const auto back = j.get<DistributionSpec>();
    EXPECT_EQ(Json(back), j);
  }
}

TEST(Serialize, RecordsRoundTripWithNaN) {
  CylinderReplicaRecord r;
  r.replica = 9;
  r.level = MeasurementLevel::kRestricted;
  r.t1 = 1.25;
  r.t2 = 2.5;
  r.delta = -1.25;
  r.x0 = std::nan("");
  r.flagged = true;
  r.flag_reason = "touched_boundary";
  const Json j = r;
  EXPECT_TRUE(j.at("x0").is_null());
  const auto back = j.get<CylinderReplicaRecord>();
  EXPECT_TRUE(std::isnan(back.x0));
  EXPECT_EQ(Json(back).dump(), j.dump());

  GeodesicSample g{12.5, 3.0, true, 2};
  const auto gb = Json(g).get<GeodesicSample>();
  EXPECT_EQ(gb.time, g.time);
  EXPECT_EQ(gb.deviation, g.deviation);
  EXPECT_EQ(gb.truncated, g.truncated);
  EXPECT_EQ(gb.retries, g.retries);
}

TEST(Tasks, ShardRangeSelectsReplicas) {
  ExperimentConfig c = small_cylinder(10);
  EXPECT_EQ(enumerate_tasks(c).size(), 10u);
  c.shard_first = 4;
  c.shard_count = 3;
  const auto t = enumerate_tasks(c);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.front().replica, 4u);
  EXPECT_EQ(t.back().replica, 6u);
  c.shard_count = 100;
  EXPECT_EQ(enumerate_tasks(c).size(), 6u);

  const auto chi = parse_config(Json{{"experiment", "chi"}, {"n_grid", {100, 200, 400, 800, 1600}}});
  std::size_t expected = 0;
  for (int n : chi.n_grid) expected += default_replicas(n);
  EXPECT_EQ(enumerate_tasks(chi).size(), expected);
}

TEST(Run, TwiceGivesIdenticalTables) {
  const fs::path dir = scratch();
  ExperimentConfig c = small_cylinder();
  const auto a = run_experiment(c, dir / "a", quiet());
  EXPECT_TRUE(a.complete);
  EXPECT_EQ(a.tasks_run, 120u);
  c.workers = 3;
  run_experiment(c, dir / "b", quiet());
  expect_same_tables(dir / "a", dir / "b");
  EXPECT_EQ(read_manifest(dir / "a").at("status"), "complete");

  // Rerunning a finished directory does no work.
  const auto again = run_experiment(c, dir / "a", quiet());
  EXPECT_EQ(again.tasks_run, 0u);
  EXPECT_EQ(again.tasks_resumed, 120u);
}

TEST(Run, ResumeAfterInterruptionMatches) {
  const fs::path dir = scratch();
  const ExperimentConfig c = small_cylinder();
  run_experiment(c, dir / "full", quiet());

  RunOptions stop = quiet();
  stop.max_tasks = 60;
  stop.batch_size = 16;
  const auto half = run_experiment(c, dir / "cut", stop);
  EXPECT_FALSE(half.complete);
  EXPECT_THROW(emit_report(dir / "cut"), IncompleteRun);
  {
    // A crash in the middle of an append leaves an unterminated line.
    std::ofstream out(dir / "cut" / "records.jsonl", std::ios::app | std::ios::binary);
    out << R"({"schema_version":1,"key":{"op":"cylinder","n":16,"repl)";
  }
  const auto rest = run_experiment(c, dir / "cut", quiet());
  EXPECT_TRUE(rest.dropped_partial_line);
  EXPECT_EQ(rest.tasks_resumed, 60u);
  EXPECT_EQ(rest.tasks_run, 60u);
  EXPECT_TRUE(rest.complete);
  expect_same_tables(dir / "full", dir / "cut");

  bool dropped = true;
  EXPECT_EQ(read_records(dir / "cut" / "records.jsonl", &dropped).size(), 120u);
  EXPECT_FALSE(dropped);
}

TEST(Run, RefusesAnotherConfigsDirectory) {
  const fs::path dir = scratch();
  ExperimentConfig c = small_cylinder(10);
  run_experiment(c, dir / "a", quiet());
  c.seed = 78;
  EXPECT_THROW(run_experiment(c, dir / "a", quiet()), ConfigError);
}

TEST(Merge, TwoShardsEqualOneRun) {
  const fs::path dir = scratch();
  ExperimentConfig c = small_cylinder();
  run_experiment(c, dir / "single", quiet());
  c.shard_count = 50;
  run_experiment(c, dir / "s1", quiet());
  c.shard_first = 50;
  c.shard_count = 0;
  run_experiment(c, dir / "s2", quiet());

  // Order of the arguments does not matter.
  const Json m = merge_shards({dir / "s2", dir / "s1"}, dir / "merged");
  EXPECT_EQ(m.at("status"), "complete");
  EXPECT_EQ(m.at("shards").size(), 2u);
  emit_report(dir / "merged");
  expect_same_tables(dir / "single", dir / "merged");
}

TEST(Merge, OverlapAndMismatchAreErrors) {
  const fs::path dir = scratch();
  ExperimentConfig c = small_cylinder(20);
  c.shard_count = 12;
  run_experiment(c, dir / "s1", quiet());
  c.shard_first = 8;
  c.shard_count = 0;
  run_experiment(c, dir / "s2", quiet());
  EXPECT_THROW(merge_shards({dir / "s1", dir / "s2"}, dir / "m"), ConfigError);

  ExperimentConfig other = small_cylinder(20);
  other.seed = 5;
  other.shard_first = 12;
  run_experiment(other, dir / "s3", quiet());
  EXPECT_THROW(merge_shards({dir / "s1", dir / "s3"}, dir / "m2"), ConfigError);
}

TEST(Merge, SingleShardIsIdentity) {
  const fs::path dir = scratch();
  const ExperimentConfig c = small_cylinder();
  run_experiment(c, dir / "a", quiet());
  merge_shards({dir / "a"}, dir / "m");
  emit_report(dir / "m");
  expect_same_tables(dir / "a", dir / "m");
  EXPECT_EQ(slurp(dir / "a" / "records.jsonl").size() > 0, true);
}

TEST(Report, EmptyRecordSetIsAnError) {
  const fs::path dir = scratch();
  RunOptions opts = quiet();
  opts.max_tasks = 0;
  run_experiment(small_cylinder(), dir / "r", opts);
  Json m = read_manifest(dir / "r");
  m["status"] = "complete";
  std::ofstream(dir / "r" / "manifest.json") << m.dump(2);
  EXPECT_THROW(emit_report(dir / "r"), InsufficientData);
  EXPECT_THROW(emit_report(dir / "missing"), IncompleteRun);
}

TEST(Report, SvgAnnotatesFittedSlope) {
  const std::vector<double> n = {16, 32, 64, 128, 256};
  std::vector<double> v;
  for (double x : n) v.push_back(3.0 * std::sqrt(x));
  const LinearFit f = log_log_fit(n, v);
  const std::string svg =
      loglog_svg("Var against n", "n", "Var", n, v, f.slope, f.slope_stderr, f.intercept);
  EXPECT_NE(svg.find("slope 0.500 ± 0.000"), std::string::npos);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(std::count(svg.begin(), svg.end(), '<') - std::count(svg.begin(), svg.end(), '>'), 0);
  EXPECT_NE(loglog_svg("a < b & c", "n", "y", n, v, 0.5, 0.01, 0.0).find("a &lt; b &amp; c"),
            std::string::npos);
}

TEST(Report, ExponentRunWritesKpzLine) {
  const fs::path dir = scratch();
  const auto c = parse_config(Json{{"experiment", "chi"},
                                   {"seed", "3"},
                                   {"n_grid", {4, 6, 8, 12, 16}},
                                   {"replicas", 60}});
  run_experiment(c, dir / "chi", quiet());
  const Json s = Json::parse(slurp(dir / "chi" / "summary.json"));
  const double chi = s.at("chi").at("value").get<double>();
  const double xi = s.at("xi").at("value").get<double>();
  const Json& kpz = s.at("kpz");
  EXPECT_NEAR(kpz.at("discrepancy").get<double>(), chi - (2.0 * xi - 1.0), 1e-12);
  const std::string line =
      fmt::format("chi - (2 xi - 1) = {:.4f} ± {:.4f}", kpz.at("discrepancy").get<double>(),
                  kpz.at("discrepancy_stderr").get<double>());
  EXPECT_NE(slurp(dir / "chi" / "summary.txt").find(line), std::string::npos);
  for (const char* f : {"exponents.csv", "variance_vs_n.svg", "deviation_vs_n.svg"}) {
    EXPECT_TRUE(fs::exists(dir / "chi" / f)) << f;
  }
  EXPECT_EQ(slurp(dir / "chi" / "exponents.csv").substr(0, 34),
            "flavor,n,statistic,stderr,replicas");
}

TEST(Check, CylinderRunPasses) {
  const fs::path dir = scratch();
  run_experiment(small_cylinder(), dir / "a", quiet());
  const CheckOutcome out = check_artifacts(dir / "a");
  EXPECT_TRUE(out.passed);
  ASSERT_FALSE(out.lines.empty());
  for (const auto& l : out.lines) EXPECT_EQ(l.rfind("PASS ", 0), 0u) << l;
}

}  // namespace
}  // namespace fpplab
