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

// Acceptance run: one PASS/FAIL line per criterion. Long experiments go
// through the harness, so an interrupted run resumes from its records unless
// --fresh is given. Exit 0 when every selected criterion passes, 3 otherwise.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fpplab/cylinder.h"
#include "fpplab/environment.h"
#include "fpplab/errors.h"
#include "fpplab/exponents.h"
#include "fpplab/geodesic.h"
#include "fpplab/harness.h"
#include "fpplab/shape.h"

namespace fpplab {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_summary(const fs::path& dir) { return Json::parse(slurp(dir / "summary.json")); }

class Acceptance {
 public:
  Acceptance(fs::path root, std::uint64_t seed, int workers)
      : root_(std::move(root)), seed_(seed), workers_(workers) {}

  Outcome oracle() {
    const BoxRegion box(LatticePoint{0, 0}, LatticePoint{3, 3});
    std::vector<LatticePoint> pts;
    for (std::size_t i = 0; i < box.num_vertices(); ++i) pts.push_back(box.point_at(i));
    double worst = 0.0;
    std::size_t pairs = 0;
    for (std::uint64_t e = 0; e < 100; ++e) {
      const Environment env(DistributionSpec::exponential(1.0),
                            derive_replica_seed(seed_, "acceptance/oracle", e), 2);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
          const double fast = passage_time(env, pts[i], pts[j], box).time;
          const double slow = brute_force_passage_time(env, pts[i], pts[j], box);
          worst = std::max(worst, std::abs(fast - slow));
          ++pairs;
        }
      }
    }
    return {worst <= 1e-12,
            fmt::format("{} pairs on 100 environments, max |tau - brute force| = {:.3g}", pairs,
                        worst)};
  }

  Outcome unit_shape() {
    const DistributionSpec unit = DistributionSpec::constant(1.0);
    const std::vector<int> grid = {4, 8, 16, 32, 64};
    const std::vector<std::pair<RealVector, double>> cases = {
        {{1, 0}, 1.0}, {{0, 1}, 1.0}, {{1, 1}, 2.0}, {{2, 3}, 5.0}};
    bool exact = true;
    for (const auto& [v, l1] : cases) {
      ShapeOptions opts;
      opts.extrapolate = false;
      const auto est = estimate_time_constant(unit, seed_, v, grid, 2, opts);
      exact = exact && est.g == l1;
      for (const auto& s : est.per_n) exact = exact && s.mean == l1 * s.n && s.std_error == 0.0;
    }
    const auto diag = estimate_curvature_exponent(unit, seed_, LatticePoint{1, 1},
                                                  default_curvature_offsets(), 64, 2);
    const auto axis = estimate_curvature_exponent(unit, seed_, LatticePoint{1, 0},
                                                  default_curvature_offsets(), 64, 2);
    const bool kappa_ok = !axis.flat && std::abs(axis.kappa - 1.0) <= 0.01;
    return {exact && diag.flat && kappa_ok,
            fmt::format("g = l1 exactly: {}; diagonal flat: {}; kappa(e1) = {:.4f}",
                        exact ? "yes" : "no", diag.flat ? "yes" : "no", axis.kappa)};
  }

  Outcome pathwise() {
    const fs::path dir = run(Json{{"experiment", "cylinder"},
                                  {"seed", seed_to_string(seed_)},
                                  {"workers", workers_},
                                  {"n", 64},
                                  {"replicas", 500},
                                  {"cylinder", {{"xi_prime", 0.7}, {"beta", 0.85}, {"level", "full"}}}},
                             "c3_pathwise");
    std::size_t unflagged = 0, violations = 0, flagged = 0;
    std::string first;
    for (const auto& line : read_records(dir / "records.jsonl")) {
      const auto r = line.payload.get<CylinderReplicaRecord>();
      if (r.flagged) {
        ++flagged;
        continue;
      }
      ++unflagged;
      const auto v = check_record_invariants(r);
      violations += v.size();
      if (!v.empty() && first.empty()) first = fmt::format(" (replica {}: {})", r.replica, v[0]);
    }
    return {violations == 0 && unflagged > 0,
            fmt::format("{} unflagged of 500 ({} flagged), {} violations{}", unflagged, flagged,
                        violations, first)};
  }

  Outcome independence() {
    const Json& a = restricted_report();
    const double corr = number_from_json(a.at("corr_restricted").at("value"));
    const double corr_se = number_from_json(a.at("corr_restricted").at("stderr"));
    const double gap = number_from_json(a.at("iid_gap").at("value"));
    const double gap_se = number_from_json(a.at("iid_gap").at("stderr"));
    const bool ok = std::abs(corr) < 3 * corr_se && std::abs(gap) < 3 * gap_se;
    return {ok, fmt::format("{} records: corr(T1', T2') = {:.4f} (3 se = {:.4f}); "
                            "Var dT' - 2 Var T1' = {:.4f} (3 se = {:.4f})",
                            a.at("records").get<std::size_t>(), corr, 3 * corr_se, gap,
                            3 * gap_se)};
  }

  Outcome perturbation() {
    std::vector<double> x(16, 0.0), y(16, 0.0);
    std::vector<std::uint8_t> b(16, 1);
    x[15] = 4.0;
    b[15] = 0;
    const PerturbationCheck c = verify_variance_perturbation(x, y, b);
    const bool closed = c.left == 0.9375 && c.right == 2.0;
    const Json& p = restricted_report().at("perturbation");
    const double left = number_from_json(p.at("left"));
    const double right = number_from_json(p.at("right"));
    const bool empirical = p.at("holds").get<bool>();
    return {closed && empirical,
            fmt::format("two-point left = {}, right = {}; empirical left = {:.4f} <= right = "
                        "{:.4f}: {}",
                        c.left, c.right, left, right, empirical ? "yes" : "no")};
  }

  Outcome synthetic() {
    const std::vector<int> grid = {16, 32, 64, 128, 256};
    const auto var = synthetic_power_law_samples(grid, 0.5, SyntheticKind::kVariance, 1000, 0.0,
                                                 seed_);
    const auto dev = synthetic_power_law_samples(grid, 2.0 / 3.0, SyntheticKind::kMean, 1000,
                                                 0.0, seed_ + 1);
    const double chi = fit_chi(grid, var, seed_).value;
    const double xi = fit_xi(grid, dev, seed_).value;
    return {std::abs(chi - 0.25) <= 0.01 && std::abs(xi - 0.667) <= 0.01,
            fmt::format("chi = {:.4f} (target 0.250), xi = {:.4f} (target 0.667)", chi, xi)};
  }

  Outcome kpz() {
    const Json& s = exponent_summary();
    if (!s.at("chi").contains("value") || !s.at("xi").contains("value")) {
      return {false, "exponent fit failed: " + s.dump()};
    }
    const double chi = number_from_json(s.at("chi").at("value"));
    const double chi_se = number_from_json(s.at("chi").at("stderr"));
    const double xi = number_from_json(s.at("xi").at("value"));
    const double xi_se = number_from_json(s.at("xi").at("stderr"));
    const double d = chi - (2 * xi - 1);
    const bool ok = chi >= 0.25 && chi <= 0.42 && xi >= 0.55 && xi <= 0.78 &&
                    std::abs(d) <= 0.15 && chi <= 0.5 + 2 * chi_se && xi >= 0.5 - 2 * xi_se;
    return {ok, fmt::format("chi = {:.4f} ± {:.4f} in [0.25, 0.42]; xi = {:.4f} ± {:.4f} in "
                            "[0.55, 0.78]; |chi - (2 xi - 1)| = {:.4f} <= 0.15",
                            chi, chi_se, xi, xi_se, std::abs(d))};
  }

  Outcome sandwich() {
    const fs::path dir = run(Json{{"experiment", "sweep"},
                                  {"seed", seed_to_string(seed_)},
                                  {"workers", workers_},
                                  {"n_grid", {32, 48, 64, 96, 128}},
                                  {"replicas", 2000},
                                  {"cylinder", {{"xi_prime", 0.7}, {"beta", 0.85}}}},
                             "c8_sweep");
    const Json t = read_summary(dir).at("scaling");
    const double x = number_from_json(t.at("exponent"));
    const double x_se = number_from_json(t.at("exponent_stderr"));
    const double hi = 2 * (2 * 0.7 - 0.85) + 0.3;
    const Json& s = exponent_summary();
    const double chi = s.at("chi").contains("value") ? number_from_json(s.at("chi").at("value"))
                                                     : std::nan("");
    const double lo = 2 * chi - 0.2;
    std::string rows;
    for (const auto& r : t.at("rows")) {
      rows += fmt::format(" n={}:{:.3f}", r.at("n").get<int>(),
                          number_from_json(r.at("var_delta").at("value")));
    }
    return {std::isfinite(x) && std::isfinite(lo) && x >= lo && x <= hi,
            fmt::format("exponent {:.4f} ± {:.4f} in [2 chi - 0.2, 1.4] = [{:.4f}, {:.4f}];"
                        " Var dT{}",
                        x, x_se, lo, hi, rows)};
  }

  Outcome determinism() {
    const fs::path base = restricted_dir();
    Json doc = restricted_doc();
    doc["workers"] = 8;
    const fs::path eight = run(doc, "c9_workers8", true);
    doc["workers"] = workers_;
    doc["shard"] = {{"first", 0}, {"count", 2500}};
    const fs::path s1 = run(doc, "c9_shard1", true);
    doc["shard"] = {{"first", 2500}, {"count", 0}};
    const fs::path s2 = run(doc, "c9_shard2", true);
    const fs::path merged = root_ / "c9_merged";
    fs::remove_all(merged);
    merge_shards({s1, s2}, merged);
    emit_report(merged);
    const auto same = [&](const fs::path& other) {
      return slurp(base / "cylinder.csv") == slurp(other / "cylinder.csv") &&
             slurp(base / "summary.json") == slurp(other / "summary.json");
    };
    const bool w = same(eight), m = same(merged);
    return {w && m, fmt::format("1 vs 8 workers identical: {}; 2-shard merge identical: {}",
                                w ? "yes" : "no", m ? "yes" : "no")};
  }

 private:
  // Runs (or resumes) an experiment under the artifacts root.
  fs::path run(const Json& doc, const std::string& name, bool fresh = false) {
    const fs::path dir = root_ / name;
    if (fresh) fs::remove_all(dir);
    const RunResult r = run_experiment(parse_config(doc), dir);
    if (!r.complete) throw IncompleteRun(dir.string());
    return dir;
  }

  Json restricted_doc() const {
    return Json{{"experiment", "cylinder"},
                {"seed", seed_to_string(seed_ + 4)},
                {"workers", 1},
                {"n", 64},
                {"replicas", 5000},
                {"cylinder", {{"xi_prime", 0.7}, {"beta", 0.85}, {"level", "restricted"}}}};
  }

  fs::path restricted_dir() {
    if (!restricted_dir_) restricted_dir_ = run(restricted_doc(), "c4_restricted");
    return *restricted_dir_;
  }

  const Json& restricted_report() {
    if (!restricted_report_) {
      const Json s = read_summary(restricted_dir());
      if (!s.contains("aggregate")) {
        throw UnreliableEstimate(s.value("aggregate_error", std::string("no aggregate")));
      }
      restricted_report_ = s.at("aggregate");
    }
    return *restricted_report_;
  }

  const Json& exponent_summary() {
    if (!exponent_summary_) {
      const fs::path dir = run(Json{{"experiment", "chi"},
                                    {"seed", seed_to_string(seed_ + 7)},
                                    {"workers", workers_},
                                    {"replicas", "default"},
                                    {"n_grid", {16, 32, 64, 128, 256}},
                                    {"direction", {1, 0}}},
                               "c7_exponents");
      exponent_summary_ = read_summary(dir);
    }
    return *exponent_summary_;
  }

  fs::path root_;
  std::uint64_t seed_;
  int workers_;
  std::optional<fs::path> restricted_dir_;
  std::optional<Json> restricted_report_;
  std::optional<Json> exponent_summary_;
};

}  // namespace
}  // namespace fpplab

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-9"};
  std::string out = "acceptance_artifacts";
  std::string seed = "2026";
  int workers = 0;
  bool fresh = false;
  std::vector<int> only;
  app.add_option("--out", out, "artifacts root");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--workers", workers, "worker threads (0: all cores)");
  app.add_option("--criteria", only, "run only these criteria")->delimiter(',');
  app.add_flag("--fresh", fresh, "discard artifacts from earlier runs");
  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  if (fresh) fs::remove_all(out);
  fs::create_directories(out);
  fpplab::Acceptance acc(out, fpplab::seed_from_json(fpplab::Json(seed)), workers);
  const std::vector<std::pair<int, std::function<fpplab::Outcome()>>> criteria = {
      {1, [&] { return acc.oracle(); }},       {2, [&] { return acc.unit_shape(); }},
      {3, [&] { return acc.pathwise(); }},     {4, [&] { return acc.independence(); }},
      {5, [&] { return acc.perturbation(); }}, {6, [&] { return acc.synthetic(); }},
      {7, [&] { return acc.kpz(); }},          {8, [&] { return acc.sandwich(); }},
      {9, [&] { return acc.determinism(); }}};
  const std::set<int> selected(only.begin(), only.end());
  bool all = true;
  for (const auto& [id, fn] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    fpplab::Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << fmt::format("criterion {} {}: {} [{:.1f} s]", id, o.passed ? "PASS" : "FAIL",
                             o.detail, secs)
              << std::endl;
    all = all && o.passed;
  }
  return all ? 0 : 3;
}
