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

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "fpplab/errors.h"
#include "fpplab/exponents.h"
#include "fpplab/parallel.h"
#include "fpplab/sampling.h"
#include "fpplab/shape.h"

namespace fpplab {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kExperiments = {"chi", "xi", "shape", "kappa", "cylinder", "sweep"};
const std::set<std::string> kTopLevel = {
    "schema_version", "experiment", "seed",     "workers", "dimension", "distribution",
    "replicas",       "n_grid",     "n",        "direction", "offsets", "extrapolate",
    "cylinder",       "shard"};
const std::set<std::string> kCylinderFields = {"xi_prime", "beta", "shift_multiplier",
                                               "outer_radius_multiplier", "level"};

bool uses_geodesics(const std::string& e) { return e == "chi" || e == "xi" || e == "shape"; }

int get_int(const Json& j, const std::string& path, long lo, long hi) {
  if (!j.is_number_integer()) throw ConfigError(path, "must be an integer");
  const long v = j.get<long>();
  if (v < lo || v > hi) throw ConfigError(path, fmt::format("must lie in [{}, {}]", lo, hi));
  return static_cast<int>(v);
}

double get_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

std::string timestamp_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

// Appends whole lines with one write() each on an O_APPEND descriptor.
class RecordWriter {
 public:
  explicit RecordWriter(const fs::path& path) {
    fd_ = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
    if (fd_ < 0) throw std::runtime_error("cannot open " + path.string());
  }
  ~RecordWriter() {
    if (fd_ >= 0) ::close(fd_);
  }
  RecordWriter(const RecordWriter&) = delete;
  RecordWriter& operator=(const RecordWriter&) = delete;

  void append(const std::string& line) {
    const ssize_t w = ::write(fd_, line.data(), line.size());
    if (w != static_cast<ssize_t>(line.size())) {
      throw std::runtime_error(std::string("record append failed: ") + std::strerror(errno));
    }
  }
  void sync() { ::fsync(fd_); }

 private:
  int fd_ = -1;
};

struct ScanResult {
  std::vector<RecordLine> lines;
  std::uintmax_t good_bytes = 0;
  bool dropped = false;
};

ScanResult scan_records(const fs::path& file) {
  ScanResult r;
  std::ifstream in(file, std::ios::binary);
  if (!in) return r;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  while (pos < content.size()) {
    const std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) {
      r.dropped = true;  // unterminated tail of an interrupted append
      break;
    }
    const std::string_view text(content.data() + pos, nl - pos);
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("key") || !j.contains("payload")) {
      if (content.find('\n', nl + 1) != std::string::npos) {
        throw std::runtime_error(fmt::format("{}: corrupt record before the last line",
                                             file.string()));
      }
      r.dropped = true;
      break;
    }
    if (j.value("schema_version", 0) != kRecordSchemaVersion) {
      throw std::runtime_error(fmt::format("{}: unsupported record schema_version", file.string()));
    }
    r.lines.push_back({j.at("key"), seed_from_json(j.at("seed")), j.at("payload")});
    pos = nl + 1;
    r.good_bytes = pos;
  }
  return r;
}

std::pair<std::uint64_t, std::uint64_t> shard_range(const Json& config_json) {
  const Json& s = config_json.at("shard");
  return {s.at("first").get<std::uint64_t>(), s.at("count").get<std::uint64_t>()};
}

std::string record_line(const TaskKey& key, std::uint64_t seed, const Json& payload,
                        double millis) {
  Json j = {{"schema_version", kRecordSchemaVersion},
            {"key", key.to_json()},
            {"seed", seed_to_string(seed)},
            {"duration_ms", millis},
            {"payload", payload}};
  return j.dump() + "\n";
}

}  // namespace

ExperimentConfig parse_config(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  for (const auto& [k, v] : doc.items()) {
    if (!kTopLevel.count(k)) throw ConfigError("/" + k, "unknown field");
  }
  ExperimentConfig c;
  if (doc.contains("schema_version") &&
      get_int(doc.at("schema_version"), "/schema_version", 1, 1000) != kConfigSchemaVersion) {
    throw ConfigError("/schema_version", fmt::format("must be {}", kConfigSchemaVersion));
  }
  if (!doc.contains("experiment") || !doc.at("experiment").is_string()) {
    throw ConfigError("/experiment", "required string");
  }
  c.experiment = doc.at("experiment").get<std::string>();
  if (!kExperiments.count(c.experiment)) {
    throw ConfigError("/experiment", "must be one of chi, xi, shape, kappa, cylinder, sweep");
  }
  if (doc.contains("seed")) {
    try {
      c.seed = seed_from_json(doc.at("seed"));
    } catch (const std::exception& e) {
      throw ConfigError("/seed", e.what());
    }
  }
  if (doc.contains("workers")) c.workers = get_int(doc.at("workers"), "/workers", 0, 4096);
  if (doc.contains("dimension")) c.dim = get_int(doc.at("dimension"), "/dimension", 2, kMaxDim);
  if (doc.contains("distribution")) {
    try {
      c.distribution = doc.at("distribution").get<DistributionSpec>();
    } catch (const std::exception& e) {
      throw ConfigError("/distribution", e.what());
    }
  }
  const ValidationResult vr = validate_distribution(c.distribution, c.dim);
  if (!vr.accepted) throw ConfigError("/distribution", vr.message);

  // Experiment-specific defaults.
  if (c.experiment == "chi" || c.experiment == "xi") c.replicas = 0;
  if (c.experiment == "shape") c.n_grid = {16, 32, 64, 128};
  if (c.experiment == "sweep") {
    c.n_grid = {32, 48, 64, 96, 128};
    c.replicas = 2000;
    c.level = MeasurementLevel::kPlain;
  }
  if (c.experiment == "kappa") c.replicas = 200;

  if (doc.contains("replicas")) {
    const Json& r = doc.at("replicas");
    if (r.is_string() && r.get<std::string>() == "default" && uses_geodesics(c.experiment)) {
      c.replicas = 0;
    } else {
      c.replicas = static_cast<std::size_t>(get_int(r, "/replicas", 1, 100000000));
    }
  }
  if (doc.contains("n_grid")) {
    const Json& g = doc.at("n_grid");
    if (!g.is_array() || g.empty()) throw ConfigError("/n_grid", "must be a nonempty array");
    c.n_grid.clear();
    for (std::size_t i = 0; i < g.size(); ++i) {
      c.n_grid.push_back(get_int(g[i], fmt::format("/n_grid/{}", i), 1, 1 << 20));
    }
  }
  if (doc.contains("n")) c.n = get_int(doc.at("n"), "/n", 1, 1 << 20);
  if (doc.contains("direction")) {
    const Json& d = doc.at("direction");
    if (!d.is_array()) throw ConfigError("/direction", "must be an array");
    c.direction.clear();
    for (std::size_t i = 0; i < d.size(); ++i) {
      c.direction.push_back(get_number(d[i], fmt::format("/direction/{}", i)));
    }
  } else {
    c.direction.assign(c.dim, 0.0);
    c.direction[0] = 1.0;
  }
  if (static_cast<int>(c.direction.size()) != c.dim) {
    throw ConfigError("/direction", "length must equal the dimension");
  }
  if (doc.contains("offsets")) {
    const Json& o = doc.at("offsets");
    if (!o.is_array()) throw ConfigError("/offsets", "must be an array");
    for (std::size_t i = 0; i < o.size(); ++i) {
      const double v = get_number(o[i], fmt::format("/offsets/{}", i));
      if (!(v > 0.0)) throw ConfigError(fmt::format("/offsets/{}", i), "must be positive");
      c.offsets.push_back(v);
    }
  }
  if (doc.contains("extrapolate")) {
    if (!doc.at("extrapolate").is_boolean()) throw ConfigError("/extrapolate", "must be a boolean");
    c.extrapolate = doc.at("extrapolate").get<bool>();
  }
  if (doc.contains("cylinder")) {
    const Json& cy = doc.at("cylinder");
    if (!cy.is_object()) throw ConfigError("/cylinder", "must be an object");
    for (const auto& [k, v] : cy.items()) {
      if (!kCylinderFields.count(k)) throw ConfigError("/cylinder/" + k, "unknown field");
    }
    if (cy.contains("xi_prime")) c.xi_prime = get_number(cy.at("xi_prime"), "/cylinder/xi_prime");
    if (cy.contains("beta")) c.beta = get_number(cy.at("beta"), "/cylinder/beta");
    if (cy.contains("shift_multiplier")) {
      c.shift_multiplier = get_number(cy.at("shift_multiplier"), "/cylinder/shift_multiplier");
    }
    if (cy.contains("outer_radius_multiplier")) {
      c.outer_radius_multiplier =
          get_number(cy.at("outer_radius_multiplier"), "/cylinder/outer_radius_multiplier");
    }
    if (cy.contains("level")) {
      try {
        c.level = measurement_level_from_string(cy.at("level").get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError("/cylinder/level", e.what());
      }
    }
  }
  if (c.experiment == "sweep") c.level = MeasurementLevel::kPlain;
  if (doc.contains("shard")) {
    const Json& s = doc.at("shard");
    if (!s.is_object()) throw ConfigError("/shard", "must be an object");
    if (s.contains("first")) c.shard_first = get_int(s.at("first"), "/shard/first", 0, 1 << 30);
    if (s.contains("count")) c.shard_count = get_int(s.at("count"), "/shard/count", 0, 1 << 30);
  }

  // Cross-field checks.
  try {
    if (c.experiment == "chi" || c.experiment == "xi") check_geometric_grid(c.n_grid, 5);
    if (c.experiment == "sweep") check_geometric_grid(c.n_grid, 4);
    if (c.experiment == "shape") {
      for (std::size_t i = 1; i < c.n_grid.size(); ++i) {
        if (c.n_grid[i] <= c.n_grid[i - 1]) throw std::invalid_argument("must be increasing");
      }
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/n_grid", e.what());
  }
  if (uses_geodesics(c.experiment) && euclidean_norm(c.direction) == 0.0) {
    throw ConfigError("/direction", "must be nonzero");
  }
  if (c.experiment == "kappa") {
    for (std::size_t i = 0; i < c.direction.size(); ++i) {
      if (c.direction[i] != std::round(c.direction[i])) {
        throw ConfigError(fmt::format("/direction/{}", i), "kappa needs a lattice direction");
      }
    }
    for (std::size_t i = 0; i < c.offsets.size(); ++i) {
      if (c.offsets[i] > kCurvatureValidityRadius) {
        throw ConfigError(fmt::format("/offsets/{}", i),
                          fmt::format("must lie in (0, {}]", kCurvatureValidityRadius));
      }
    }
    std::vector<int> u;
    for (double v : c.direction) u.push_back(static_cast<int>(std::lround(v)));
    try {
      curvature_steps(LatticePoint(std::span<const int>(u)),
                      c.offsets.empty() ? default_curvature_offsets() : c.offsets, c.n);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(c.offsets.empty() ? "/n" : "/offsets", e.what());
    }
    if (c.replicas < 2) throw ConfigError("/replicas", "kappa needs at least two replicas");
    if (c.shard_first != 0 || c.shard_count != 0) {
      throw ConfigError("/shard", "the kappa experiment is a single task and cannot be sharded");
    }
  }
  if (c.experiment == "cylinder" || c.experiment == "sweep") {
    try {
      CylinderExperimentConfig cc = cylinder_config(c);
      for (int n : c.experiment == "sweep" ? c.n_grid : std::vector<int>{c.n}) {
        cc.n = n;
        cc.validate();
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/cylinder", e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("", "config file is not valid JSON");
  return parse_config(doc);
}

Json config_to_json(const ExperimentConfig& c) {
  Json replicas = c.replicas == 0 ? Json("default") : Json(c.replicas);
  return {{"schema_version", kConfigSchemaVersion},
          {"experiment", c.experiment},
          {"seed", seed_to_string(c.seed)},
          {"workers", c.workers},
          {"dimension", c.dim},
          {"distribution", c.distribution},
          {"replicas", replicas},
          {"n_grid", c.n_grid},
          {"n", c.n},
          {"direction", c.direction},
          {"offsets", c.offsets},
          {"extrapolate", c.extrapolate},
          {"cylinder",
           {{"xi_prime", c.xi_prime},
            {"beta", c.beta},
            {"shift_multiplier", c.shift_multiplier},
            {"outer_radius_multiplier", c.outer_radius_multiplier},
            {"level", std::string(to_string(c.level))}}},
          {"shard", {{"first", c.shard_first}, {"count", c.shard_count}}}};
}

std::string config_hash(const ExperimentConfig& config) {
  Json j = config_to_json(config);
  j.erase("workers");
  j.erase("shard");
  return fmt::format("{:016x}", fnv1a(j.dump()));
}

CylinderExperimentConfig cylinder_config(const ExperimentConfig& c) {
  CylinderExperimentConfig cc;
  cc.dim = c.dim;
  cc.n = c.n;
  cc.xi_prime = c.xi_prime;
  cc.beta = c.beta;
  cc.shift_multiplier = c.shift_multiplier;
  cc.outer_radius_multiplier = c.outer_radius_multiplier;
  cc.replicas = c.replicas;
  cc.seed = c.seed;
  cc.distribution = c.distribution;
  cc.level = c.level;
  return cc;
}

Json TaskKey::to_json() const { return {{"op", op}, {"n", n}, {"replica", replica}}; }

std::string TaskKey::canonical() const { return to_json().dump(); }

std::vector<TaskKey> enumerate_tasks(const ExperimentConfig& c) {
  std::vector<TaskKey> tasks;
  const auto range = [&](std::size_t total, const std::string& op, int n) {
    const std::uint64_t lo = c.shard_first;
    const std::uint64_t hi =
        c.shard_count == 0 ? total : std::min<std::uint64_t>(total, lo + c.shard_count);
    for (std::uint64_t r = lo; r < hi; ++r) tasks.push_back({op, n, r});
  };
  if (uses_geodesics(c.experiment)) {
    for (int n : c.n_grid) range(c.replicas ? c.replicas : default_replicas(n), "geodesic", n);
  } else if (c.experiment == "cylinder") {
    range(c.replicas, "cylinder", c.n);
  } else if (c.experiment == "sweep") {
    for (int n : c.n_grid) range(c.replicas, "cylinder", n);
  } else if (c.experiment == "kappa") {
    tasks.push_back({"curvature", c.n, 0});
  }
  return tasks;
}

std::vector<RecordLine> read_records(const fs::path& file, bool* dropped) {
  ScanResult r = scan_records(file);
  if (dropped) *dropped = r.dropped;
  return std::move(r.lines);
}

Json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IncompleteRun("no manifest.json in " + dir.string());
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw IncompleteRun("manifest.json is not valid JSON");
  return j;
}

namespace {

Json new_manifest(const ExperimentConfig& c) {
  const std::string hash = config_hash(c);
  return {{"schema_version", kManifestSchemaVersion},
          {"experiment_id", fmt::format("{}-{}", c.experiment, hash.substr(0, 8))},
          {"config", config_to_json(c)},
          {"config_hash", hash},
          {"seed", seed_to_string(c.seed)},
          {"schema_versions",
           {{"config", kConfigSchemaVersion},
            {"records", kRecordSchemaVersion},
            {"manifest", kManifestSchemaVersion}}},
          {"seed_derivation", std::string(kSeedDerivationRule)},
          {"started", timestamp_now()},
          {"finished", nullptr},
          {"status", "running"},
          {"shards",
           Json::array({{{"first", c.shard_first}, {"count", c.shard_count}, {"status", "running"}}})}};
}

// Evaluates one task; returns the payload and the derived seed.
struct TaskRunner {
  const ExperimentConfig& c;
  std::map<int, CylinderGeometry> geometry;
  CylinderExperimentConfig base;

  explicit TaskRunner(const ExperimentConfig& config) : c(config), base(cylinder_config(config)) {
    if (c.experiment == "cylinder") geometry.emplace(c.n, CylinderGeometry::build(base));
    if (c.experiment == "sweep") {
      for (int n : c.n_grid) {
        CylinderExperimentConfig cc = base;
        cc.n = n;
        geometry.emplace(n, CylinderGeometry::build(cc));
      }
    }
  }

  std::pair<Json, std::uint64_t> run(const TaskKey& t) const {
    if (t.op == "geodesic") {
      const auto s = sample_geodesics(c.distribution, c.seed, t.n, c.direction, 1, 1, t.replica);
      return {Json(s.front()), derive_replica_seed(c.seed, geodesic_experiment_id(t.n, c.direction),
                                                   t.replica)};
    }
    if (t.op == "cylinder") {
      CylinderExperimentConfig cc = base;
      cc.n = t.n;
      const auto r = run_replica(cc, geometry.at(t.n), t.replica);
      return {Json(r), derive_replica_seed(c.seed, "cylinder", t.replica)};
    }
    std::vector<int> u;
    for (double v : c.direction) u.push_back(static_cast<int>(std::lround(v)));
    ShapeOptions opts;
    opts.workers = c.workers;
    const auto est = estimate_curvature_exponent(
        c.distribution, c.seed, LatticePoint(std::span<const int>(u)),
        c.offsets.empty() ? default_curvature_offsets() : c.offsets, c.n, c.replicas, opts);
    return {Json(est), c.seed};
  }
};

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const fs::path& out,
                         const RunOptions& options) {
  RunResult result;
  result.dir = out;
  fs::create_directories(out);
  const fs::path manifest_path = out / "manifest.json";
  const fs::path records_path = out / "records.jsonl";
  const std::string hash = config_hash(config);

  Json manifest;
  if (fs::exists(manifest_path)) {
    manifest = read_manifest(out);
    if (manifest.value("config_hash", "") != hash) {
      throw ConfigError("", fmt::format("{} holds a different experiment (hash {}); "
                                        "use another output directory",
                                        out.string(), manifest.value("config_hash", "?")));
    }
    if (manifest.at("config").at("shard") != config_to_json(config).at("shard")) {
      throw ConfigError("/shard", "shard range differs from the run in " + out.string());
    }
  } else {
    if (fs::exists(records_path)) {
      throw ConfigError("", records_path.string() + " exists without a manifest");
    }
    manifest = new_manifest(config);
    write_text(manifest_path, manifest.dump(2) + "\n");
  }

  const std::vector<TaskKey> tasks = enumerate_tasks(config);
  result.tasks_total = tasks.size();
  std::set<std::string> wanted;
  for (const auto& t : tasks) wanted.insert(t.canonical());

  ScanResult existing = scan_records(records_path);
  if (existing.dropped) {
    fs::resize_file(records_path, existing.good_bytes);
    result.dropped_partial_line = true;
  }
  std::set<std::string> done;
  for (const auto& line : existing.lines) {
    const std::string k = line.key.dump();
    if (!wanted.count(k)) throw ConfigError("", "record " + k + " does not belong to this config");
    done.insert(k);
  }
  result.tasks_resumed = done.size();

  std::vector<TaskKey> pending;
  for (const auto& t : tasks) {
    if (!done.count(t.canonical())) pending.push_back(t);
  }
  if (options.max_tasks && pending.size() > *options.max_tasks) pending.resize(*options.max_tasks);

  if (!pending.empty()) {
    const TaskRunner runner(config);
    RecordWriter writer(records_path);
    // Within a task the search is single-threaded; kappa parallelises inside.
    const int workers = config.experiment == "kappa" ? 1 : config.workers;
    const std::size_t batch = std::max<std::size_t>(
        options.batch_size, static_cast<std::size_t>(resolve_workers(workers)));
    std::vector<std::string> lines;
    for (std::size_t start = 0; start < pending.size(); start += batch) {
      const std::size_t count = std::min(batch, pending.size() - start);
      lines.assign(count, {});
      parallel_for(count, workers, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto [payload, seed] = runner.run(pending[start + i]);
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        lines[i] = record_line(pending[start + i], seed, payload, std::round(ms * 1000.0) / 1000.0);
      });
      for (const auto& l : lines) writer.append(l);
      writer.sync();
      result.tasks_run += count;
    }
  }

  result.complete = result.tasks_resumed + result.tasks_run == result.tasks_total;
  if (result.complete && manifest.value("status", "") != "complete") {
    manifest["status"] = "complete";
    manifest["finished"] = timestamp_now();
    for (auto& s : manifest["shards"]) s["status"] = "complete";
    write_text(manifest_path, manifest.dump(2) + "\n");
  }
  if (result.complete && options.emit_report) emit_report(out);
  return result;
}

Json merge_shards(const std::vector<fs::path>& shards, const fs::path& out) {
  if (shards.empty()) throw std::invalid_argument("no shards to merge");
  std::vector<Json> manifests;
  for (const auto& dir : shards) {
    Json m = read_manifest(dir);
    if (m.value("status", "") != "complete") {
      throw IncompleteRun(dir.string() + " is not a completed run");
    }
    manifests.push_back(std::move(m));
  }
  const std::string hash = manifests.front().at("config_hash").get<std::string>();
  ExperimentConfig config = parse_config(manifests.front().at("config"));

  // Replica ranges, made concrete.
  std::size_t total = 0;
  {
    ExperimentConfig whole = config;
    whole.shard_first = 0;
    whole.shard_count = 0;
    for (const auto& t : enumerate_tasks(whole)) total = std::max<std::size_t>(total, t.replica + 1);
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    if (manifests[i].at("config_hash").get<std::string>() != hash) {
      throw ConfigError("", fmt::format("config hash mismatch: {} vs {}", hash,
                                        manifests[i].at("config_hash").get<std::string>()));
    }
    const auto [first, count] = shard_range(manifests[i].at("config"));
    const std::uint64_t hi = count == 0 ? std::max<std::uint64_t>(total, first)
                                        : std::min<std::uint64_t>(first + count, total);
    ranges.push_back({first, hi});
  }
  std::vector<std::size_t> order(ranges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ranges[a] < ranges[b]; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto& prev = ranges[order[k - 1]];
    const auto& cur = ranges[order[k]];
    if (cur.first < prev.second) {
      throw ConfigError("/shard", fmt::format("replica ranges [{}, {}) and [{}, {}) overlap",
                                              prev.first, prev.second, cur.first, cur.second));
    }
    if (cur.first > prev.second) {
      throw ConfigError("/shard", fmt::format("gap between replica ranges at {}", prev.second));
    }
  }
  config.shard_first = ranges[order.front()].first;
  const std::uint64_t end = ranges[order.back()].second;
  config.shard_count =
      config.shard_first == 0 && end >= total ? 0 : static_cast<std::size_t>(end - config.shard_first);

  std::map<std::string, std::string> by_key;
  for (const auto& dir : shards) {
    for (const auto& line : read_records(dir / "records.jsonl")) {
      Json j = {{"schema_version", kRecordSchemaVersion},
                {"key", line.key},
                {"seed", seed_to_string(line.seed)},
                {"payload", line.payload}};
      if (!by_key.emplace(line.key.dump(), j.dump() + "\n").second) {
        throw ConfigError("/shard", "task " + line.key.dump() + " appears in two shards");
      }
    }
  }
  fs::create_directories(out);
  if (fs::exists(out / "manifest.json") || fs::exists(out / "records.jsonl")) {
    throw ConfigError("", out.string() + " already holds a run");
  }
  std::string text;
  for (const auto& t : enumerate_tasks(config)) {
    const auto it = by_key.find(t.canonical());
    if (it == by_key.end()) throw IncompleteRun("merged shards miss task " + t.canonical());
    text += it->second;
  }
  write_text(out / "records.jsonl", text);

  Json manifest = new_manifest(config);
  manifest["status"] = "complete";
  manifest["finished"] = timestamp_now();
  manifest["shards"] = Json::array();
  for (std::size_t i : order) {
    manifest["shards"].push_back({{"first", ranges[i].first},
                                  {"count", ranges[i].second - ranges[i].first},
                                  {"status", "complete"},
                                  {"source", shards[i].string()}});
  }
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace fpplab
