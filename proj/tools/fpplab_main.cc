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

// fpplab command line. Settings come from flags, then the --config file, then
// built-in defaults. Exit codes: 0 ok, 2 config error, 3 check failure,
// 4 incomplete data.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fpplab/errors.h"
#include "fpplab/harness.h"

namespace {

using fpplab::Json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCheck = 3;
constexpr int kExitIncomplete = 4;

struct Globals {
  std::string seed;
  std::optional<int> workers;
  std::string out;
  std::string config;
};

struct Overrides {
  std::string replicas;
  std::optional<int> n;
  std::vector<int> n_grid;
  std::vector<double> direction;
  std::vector<double> offsets;
  std::string level;
  std::optional<double> xi_prime;
  std::optional<double> beta;
  std::optional<int> dimension;
  std::optional<std::uint64_t> shard_first;
  std::optional<std::size_t> shard_count;
  std::optional<std::size_t> max_tasks;
  bool check = false;
};

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fpplab::ConfigError("", "cannot read " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw fpplab::ConfigError("", path + " is not valid JSON");
  return j;
}

// Flags > file > defaults: flags are written over the file document before
// validation, so every value goes through the same checks.
Json build_document(const std::string& experiment, const Globals& g, const Overrides& o) {
  Json doc = g.config.empty() ? Json::object() : read_json_file(g.config);
  if (!doc.is_object()) throw fpplab::ConfigError("", "config must be a JSON object");
  if (doc.contains("experiment") && doc["experiment"] != experiment) {
    throw fpplab::ConfigError("/experiment",
                              fmt::format("config is for '{}', not '{}'",
                                          doc["experiment"].dump(), experiment));
  }
  doc["experiment"] = experiment;
  if (!g.seed.empty()) doc["seed"] = g.seed;
  if (g.workers) doc["workers"] = *g.workers;
  if (o.dimension) doc["dimension"] = *o.dimension;
  if (!o.replicas.empty()) {
    if (o.replicas == "default") {
      doc["replicas"] = "default";
    } else {
      try {
        doc["replicas"] = std::stoll(o.replicas);
      } catch (const std::exception&) {
        throw fpplab::ConfigError("/replicas", "must be an integer or 'default'");
      }
    }
  }
  if (o.n) doc["n"] = *o.n;
  if (!o.n_grid.empty()) doc["n_grid"] = o.n_grid;
  if (!o.direction.empty()) doc["direction"] = o.direction;
  if (!o.offsets.empty()) doc["offsets"] = o.offsets;
  if (!o.level.empty()) doc["cylinder"]["level"] = o.level;
  if (o.xi_prime) doc["cylinder"]["xi_prime"] = *o.xi_prime;
  if (o.beta) doc["cylinder"]["beta"] = *o.beta;
  if (o.shard_first) doc["shard"]["first"] = *o.shard_first;
  if (o.shard_count) doc["shard"]["count"] = *o.shard_count;
  return doc;
}

int print_check(const fs::path& dir) {
  const fpplab::CheckOutcome c = fpplab::check_artifacts(dir);
  for (const auto& l : c.lines) std::cout << l << "\n";
  return c.passed ? kExitOk : kExitCheck;
}

void print_summary(const fs::path& dir) {
  std::ifstream in(dir / "summary.txt");
  std::cout << in.rdbuf();
}

int run(const std::string& experiment, const Globals& g, const Overrides& o) {
  const fpplab::ExperimentConfig config = fpplab::parse_config(build_document(experiment, g, o));
  const fs::path out = g.out.empty() ? fs::path("runs") / fmt::format("{}-{}", experiment,
                                                                      fpplab::config_hash(config))
                                     : fs::path(g.out);
  if (fs::exists(out / "manifest.json")) {
    const Json m = fpplab::read_manifest(out);
    if (m.value("status", "") != "complete") {
      std::cerr << fmt::format("resuming the partial run in {}\n", out.string());
    }
  }
  fpplab::RunOptions opts;
  opts.max_tasks = o.max_tasks;
  const fpplab::RunResult r = fpplab::run_experiment(config, out, opts);
  std::cerr << fmt::format("{}: {} tasks, {} new, {} resumed{}\n", out.string(), r.tasks_total,
                           r.tasks_run, r.tasks_resumed,
                           r.dropped_partial_line ? ", dropped a truncated record" : "");
  if (!r.complete) {
    std::cerr << "run is partial; repeat the command to resume\n";
    return kExitIncomplete;
  }
  print_summary(out);
  return o.check ? print_check(out) : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"First-passage percolation experiments"};
  app.require_subcommand(1);
  Globals g;
  Overrides o;
  app.add_option("--seed", g.seed, "master seed (decimal)");
  app.add_option("--workers", g.workers, "worker threads, 0 for all cores");
  app.add_option("--out", g.out, "artifacts directory");
  app.add_option("--config", g.config, "JSON config file");

  std::string experiment;
  for (const char* name : {"chi", "xi", "shape", "kappa", "cylinder", "sweep"}) {
    CLI::App* sub = app.add_subcommand(name, fmt::format("run the {} experiment", name));
    sub->fallthrough();
    sub->add_option("--replicas", o.replicas, "replicas per n, or 'default'");
    sub->add_option("--n", o.n, "scale (kappa, cylinder)");
    sub->add_option("--n-grid", o.n_grid, "scales")->delimiter(',');
    sub->add_option("--direction", o.direction, "direction v")->delimiter(',');
    sub->add_option("--offsets", o.offsets, "kappa offsets")->delimiter(',');
    sub->add_option("--dimension", o.dimension, "lattice dimension");
    sub->add_option("--level", o.level, "plain, restricted or full");
    sub->add_option("--xi-prime", o.xi_prime, "cylinder radius exponent");
    sub->add_option("--beta", o.beta, "hyperplane exponent");
    sub->add_option("--shard-first", o.shard_first, "first replica of this shard");
    sub->add_option("--shard-count", o.shard_count, "replicas in this shard");
    sub->add_option("--max-tasks", o.max_tasks, "stop after this many new tasks");
    sub->add_flag("--check", o.check, "run acceptance checks afterwards");
    sub->callback([&experiment, name] { experiment = name; });
  }

  std::string config_path;
  CLI::App* validate = app.add_subcommand("validate", "validate a config file");
  validate->fallthrough();
  validate->add_option("config", config_path, "config file")->required();

  std::string dir;
  CLI::App* report = app.add_subcommand("report", "write summaries and plots for a run");
  report->fallthrough();
  report->add_option("dir", dir, "artifacts directory")->required();
  CLI::App* check = app.add_subcommand("check", "run acceptance checks on a run");
  check->fallthrough();
  check->add_option("dir", dir, "artifacts directory")->required();

  std::vector<std::string> shards;
  CLI::App* merge = app.add_subcommand("merge", "merge shard directories into --out");
  merge->fallthrough();
  merge->add_option("shards", shards, "shard directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (!experiment.empty()) return run(experiment, g, o);
    if (*validate) {
      const auto c = fpplab::load_config(config_path);
      std::cout << fmt::format("ok: {} experiment, {} tasks, config hash {}\n", c.experiment,
                               fpplab::enumerate_tasks(c).size(), fpplab::config_hash(c));
      return kExitOk;
    }
    if (*report) {
      fpplab::emit_report(dir);
      print_summary(dir);
      return kExitOk;
    }
    if (*check) return print_check(dir);
    if (*merge) {
      if (g.out.empty()) throw fpplab::ConfigError("", "merge needs --out");
      fpplab::merge_shards({shards.begin(), shards.end()}, g.out);
      fpplab::emit_report(g.out);
      print_summary(g.out);
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fpplab::IncompleteRun& e) {
    std::cerr << "incomplete: " << e.what() << "\n";
    return kExitIncomplete;
  } catch (const fpplab::InsufficientData& e) {
    std::cerr << "insufficient data: " << e.what() << "\n";
    return kExitIncomplete;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
