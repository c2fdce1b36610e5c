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

// Experiment orchestration. An experiment is a list of independent tasks
// (one replica each, or one curvature fit) derived from a JSON config. Tasks
// run in batches on a worker pool; results are appended to records.jsonl in
// task order, so summaries depend only on (config, seed).
//
// Artifacts directory:
//   manifest.json   config snapshot, hash, seeds, schema versions, status
//   records.jsonl   one task per line, field "schema_version"
//   summary.json, *.csv, *.svg, summary.txt   written by emit_report

#ifndef FPPLAB_HARNESS_H_
#define FPPLAB_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fpplab/cylinder.h"
#include "fpplab/environment.h"
#include "fpplab/serialize.h"

namespace fpplab {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kRecordSchemaVersion = 1;
inline constexpr int kManifestSchemaVersion = 1;

// Experiments: chi, xi, shape (geodesic samples per n and replica), kappa
// (one curvature task), cylinder (one replica per task), sweep (plain
// cylinder replicas per n).
struct ExperimentConfig {
  std::string experiment = "cylinder";
  std::uint64_t seed = 0;
  int workers = 1;
  int dim = 2;
  DistributionSpec distribution = DistributionSpec::exponential(1.0);
  // 0 selects the default schedule max(200, ceil(1e6 / n)) (chi, xi, shape).
  std::size_t replicas = 500;
  std::vector<int> n_grid = {16, 32, 64, 128, 256};
  int n = 64;
  RealVector direction = {1.0, 0.0};
  std::vector<double> offsets;  // kappa; empty selects the default offsets
  bool extrapolate = true;      // shape
  double xi_prime = 0.7;
  double beta = 0.85;
  double shift_multiplier = 4.0;
  double outer_radius_multiplier = 5.0;
  MeasurementLevel level = MeasurementLevel::kFull;
  // Replica range [first, first + count) of this shard; count 0 means all.
  std::uint64_t shard_first = 0;
  std::size_t shard_count = 0;
};

// Parses and validates a config document. Throws ConfigError naming the
// offending field as a JSON pointer.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
// Canonical snapshot (all fields, defaults filled in).
Json config_to_json(const ExperimentConfig& config);
// FNV-1a-64 over the snapshot without workers and shard fields, in hex.
std::string config_hash(const ExperimentConfig& config);

CylinderExperimentConfig cylinder_config(const ExperimentConfig& config);

struct TaskKey {
  std::string op;  // "geodesic", "cylinder", "curvature"
  int n = 0;
  std::uint64_t replica = 0;
  Json to_json() const;
  std::string canonical() const;  // compact dump, used as the unique key
};

// Every task of the config's shard, in execution order.
std::vector<TaskKey> enumerate_tasks(const ExperimentConfig& config);

struct RunOptions {
  // Stop after this many new tasks (simulates an interrupted run).
  std::optional<std::size_t> max_tasks;
  std::size_t batch_size = 64;
  bool emit_report = true;
};

struct RunResult {
  std::filesystem::path dir;
  std::size_t tasks_total = 0;
  std::size_t tasks_run = 0;      // new in this invocation
  std::size_t tasks_resumed = 0;  // already present
  bool complete = false;
  bool dropped_partial_line = false;
};

// Runs (or resumes) the experiment into `out`. A directory holding another
// config's records is refused with ConfigError.
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out,
                         const RunOptions& options = {});

struct RecordLine {
  Json key;
  std::uint64_t seed = 0;
  Json payload;
};

// Parses records.jsonl. A final line without newline or with invalid JSON is
// dropped (and reported through `dropped`).
std::vector<RecordLine> read_records(const std::filesystem::path& file, bool* dropped = nullptr);

Json read_manifest(const std::filesystem::path& dir);

// Concatenates shard directories into `out`. Shards must share the config
// hash and have disjoint replica ranges; records are written in task order.
Json merge_shards(const std::vector<std::filesystem::path>& shards,
                  const std::filesystem::path& out);

// Builds summaries, CSV tables, SVG plots and summary.txt from a completed
// artifacts directory. Throws IncompleteRun or InsufficientData.
Json emit_report(const std::filesystem::path& dir);

struct CheckOutcome {
  bool passed = true;
  std::vector<std::string> lines;  // "PASS ..." or "FAIL ..."
};

// Acceptance checks for the experiment stored in `dir` (runs emit_report
// first if summary.json is missing).
CheckOutcome check_artifacts(const std::filesystem::path& dir);

// Standalone SVG log-log plot with the fitted line and a "slope a ± b" label.
std::string loglog_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<double>& x,
                       const std::vector<double>& y, double slope, double slope_stderr,
                       double intercept);

}  // namespace fpplab

#endif  // FPPLAB_HARNESS_H_
