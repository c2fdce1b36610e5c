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

#include "fpplab/serialize.h"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fpplab {

namespace {

Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json measured_or_null(const Measured& m) {
  if (!std::isfinite(m.value)) return nullptr;
  return m;
}

double param(const Json& params, const char* name) {
  if (!params.contains(name) || !params.at(name).is_number()) {
    throw std::invalid_argument(std::string("distribution parameter '") + name +
                                "' must be a number");
  }
  return params.at(name).get<double>();
}

}  // namespace

std::string seed_to_string(std::uint64_t seed) { return std::to_string(seed); }

std::uint64_t seed_from_json(const Json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v < 0) throw std::invalid_argument("seed must be non-negative");
    return static_cast<std::uint64_t>(v);
  }
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
      throw std::invalid_argument("seed string must be a decimal 64-bit integer");
    }
    return v;
  }
  throw std::invalid_argument("seed must be a decimal string or an integer");
}

double number_from_json(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

void to_json(Json& j, const LatticePoint& p) {
  j = Json::array();
  for (int a = 0; a < p.dim(); ++a) j.push_back(p[a]);
}

void from_json(const Json& j, LatticePoint& p) {
  const auto coords = j.get<std::vector<int>>();
  if (coords.empty()) {
    p = LatticePoint();
    return;
  }
  p = LatticePoint(std::span<const int>(coords));
}

void to_json(Json& j, const DistributionSpec& spec) {
  Json params = Json::object();
  switch (spec.kind) {
    case DistributionKind::kExponential:
      params["rate"] = spec.rate;
      break;
    case DistributionKind::kUniform:
      params["lower"] = spec.lower;
      params["upper"] = spec.upper;
      break;
    case DistributionKind::kGamma:
      params["shape"] = spec.shape;
      params["scale"] = spec.scale;
      break;
    case DistributionKind::kDiscrete: {
      Json atoms = Json::array();
      for (const Atom& a : spec.atoms) {
        atoms.push_back({{"value", a.value}, {"probability", a.probability}});
      }
      params["atoms"] = atoms;
      break;
    }
  }
  j = {{"kind", std::string(to_string(spec.kind))}, {"params", params}};
}

void from_json(const Json& j, DistributionSpec& spec) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw std::invalid_argument("distribution needs a string 'kind'");
  }
  const Json params = j.value("params", Json::object());
  if (!params.is_object()) throw std::invalid_argument("distribution 'params' must be an object");
  switch (distribution_kind_from_string(j.at("kind").get<std::string>())) {
    case DistributionKind::kExponential:
      spec = DistributionSpec::exponential(param(params, "rate"));
      break;
    case DistributionKind::kUniform:
      spec = DistributionSpec::uniform(param(params, "lower"), param(params, "upper"));
      break;
    case DistributionKind::kGamma:
      spec = DistributionSpec::gamma(param(params, "shape"), param(params, "scale"));
      break;
    case DistributionKind::kDiscrete: {
      if (!params.contains("atoms") || !params.at("atoms").is_array()) {
        throw std::invalid_argument("discrete distribution needs an 'atoms' array");
      }
      std::vector<Atom> atoms;
      for (const Json& a : params.at("atoms")) atoms.push_back({param(a, "value"), param(a, "probability")});
      spec = DistributionSpec::discrete(std::move(atoms));
      break;
    }
  }
  spec.check_well_formed();
}

void to_json(Json& j, const PathResult& path) {
  j = {{"time", num(path.time)},
       {"vertices", path.vertices},
       {"flags", {{"touched_boundary", path.touched_boundary}, {"feasible", path.feasible}}}};
}

void from_json(const Json& j, PathResult& path) {
  path.time = number_from_json(j.at("time"));
  path.vertices = j.at("vertices").get<std::vector<LatticePoint>>();
  path.touched_boundary = j.at("flags").at("touched_boundary").get<bool>();
  path.feasible = j.at("flags").at("feasible").get<bool>();
}

void to_json(Json& j, const GeodesicSample& s) {
  j = {{"time", num(s.time)},
       {"deviation", num(s.deviation)},
       {"truncated", s.truncated},
       {"retries", s.retries}};
}

void from_json(const Json& j, GeodesicSample& s) {
  s.time = number_from_json(j.at("time"));
  s.deviation = number_from_json(j.at("deviation"));
  s.truncated = j.at("truncated").get<bool>();
  s.retries = j.at("retries").get<int>();
}

void to_json(Json& j, const CylinderReplicaRecord& r) {
  j = {{"replica", r.replica},
       {"level", std::string(to_string(r.level))},
       {"t1", num(r.t1)},
       {"t2", num(r.t2)},
       {"t1_restricted", num(r.t1_restricted)},
       {"t2_restricted", num(r.t2_restricted)},
       {"t1_crossing", num(r.t1_crossing)},
       {"t2_crossing", num(r.t2_crossing)},
       {"delta", num(r.delta)},
       {"delta_restricted", num(r.delta_restricted)},
       {"delta_crossing", num(r.delta_crossing)},
       {"b_restricted", r.b_restricted},
       {"b_crossing", r.b_crossing},
       {"x0", num(r.x0)},
       {"x1", num(r.x1)},
       {"a1", r.a1},
       {"a2", r.a2},
       {"a1_prime", r.a1_prime},
       {"a2_prime", r.a2_prime},
       {"feasible", r.feasible},
       {"touched_boundary", r.touched_boundary},
       {"gate_order_ok", r.gate_order_ok},
       {"flagged", r.flagged},
       {"flag_reason", r.flag_reason}};
}

void from_json(const Json& j, CylinderReplicaRecord& r) {
  r.replica = j.at("replica").get<std::uint64_t>();
  r.level = measurement_level_from_string(j.at("level").get<std::string>());
  r.t1 = number_from_json(j.at("t1"));
  r.t2 = number_from_json(j.at("t2"));
  r.t1_restricted = number_from_json(j.at("t1_restricted"));
  r.t2_restricted = number_from_json(j.at("t2_restricted"));
  r.t1_crossing = number_from_json(j.at("t1_crossing"));
  r.t2_crossing = number_from_json(j.at("t2_crossing"));
  r.delta = number_from_json(j.at("delta"));
  r.delta_restricted = number_from_json(j.at("delta_restricted"));
  r.delta_crossing = number_from_json(j.at("delta_crossing"));
  r.b_restricted = j.at("b_restricted").get<bool>();
  r.b_crossing = j.at("b_crossing").get<bool>();
  r.x0 = number_from_json(j.at("x0"));
  r.x1 = number_from_json(j.at("x1"));
  r.a1 = j.at("a1").get<LatticePoint>();
  r.a2 = j.at("a2").get<LatticePoint>();
  r.a1_prime = j.at("a1_prime").get<LatticePoint>();
  r.a2_prime = j.at("a2_prime").get<LatticePoint>();
  r.feasible = j.at("feasible").get<bool>();
  r.touched_boundary = j.at("touched_boundary").get<bool>();
  r.gate_order_ok = j.at("gate_order_ok").get<bool>();
  r.flagged = j.at("flagged").get<bool>();
  r.flag_reason = j.at("flag_reason").get<std::string>();
}

void to_json(Json& j, const CurvatureEstimate& c) {
  Json gaps = Json::array(), ses = Json::array();
  for (double g : c.gaps) gaps.push_back(num(g));
  for (double s : c.gap_stderr) ses.push_back(num(s));
  j = {{"direction", c.direction},
       {"tangent", c.tangent},
       {"n", c.n},
       {"steps", c.steps},
       {"offsets", c.offsets},
       {"gaps", gaps},
       {"gap_stderr", ses},
       {"replicas", c.replicas},
       {"truncated", c.truncated},
       {"validity_radius", c.validity_radius},
       {"flat", c.flat},
       {"kappa", num(c.kappa)},
       {"kappa_stderr", num(c.kappa_stderr)},
       {"fit_r_squared", num(c.fit_r_squared)},
       {"warnings", c.warnings}};
}

void from_json(const Json& j, CurvatureEstimate& c) {
  c.direction = j.at("direction").get<LatticePoint>();
  c.tangent = j.at("tangent").get<LatticePoint>();
  c.n = j.at("n").get<int>();
  c.steps = j.at("steps").get<std::vector<int>>();
  c.offsets = j.at("offsets").get<std::vector<double>>();
  c.gaps.clear();
  c.gap_stderr.clear();
  for (const Json& g : j.at("gaps")) c.gaps.push_back(number_from_json(g));
  for (const Json& s : j.at("gap_stderr")) c.gap_stderr.push_back(number_from_json(s));
  c.replicas = j.at("replicas").get<std::size_t>();
  c.truncated = j.at("truncated").get<std::size_t>();
  c.validity_radius = j.at("validity_radius").get<double>();
  c.flat = j.at("flat").get<bool>();
  c.kappa = number_from_json(j.at("kappa"));
  c.kappa_stderr = number_from_json(j.at("kappa_stderr"));
  c.fit_r_squared = number_from_json(j.at("fit_r_squared"));
  c.warnings = j.at("warnings").get<std::vector<std::string>>();
}

void to_json(Json& j, const ExponentEstimate& e) {
  Json stat = Json::array(), se = Json::array();
  for (double v : e.statistic) stat.push_back(num(v));
  for (double v : e.statistic_stderr) se.push_back(num(v));
  j = {{"flavor", std::string(to_string(e.flavor))},
       {"value", num(e.value)},
       {"stderr", num(e.std_error)},
       {"window", {e.window_lo, e.window_hi}},
       {"n_grid", e.n_grid},
       {"statistic", stat},
       {"statistic_stderr", se},
       {"replicas", e.replicas},
       {"r_squared", num(e.r_squared)},
       {"reduced_window_value", num(e.reduced_window_value)},
       {"flags", {{"finite_size", e.finite_size_warning}, {"out_of_range", e.out_of_range}}},
       {"warnings", e.warnings}};
}

void to_json(Json& j, const KpzReport& r) {
  j = {{"chi", num(r.chi)},
       {"xi", num(r.xi)},
       {"discrepancy", num(r.discrepancy)},
       {"discrepancy_stderr", num(r.discrepancy_stderr)},
       {"relation_violated", r.relation_violated},
       {"chi_above_half", r.chi_above_half},
       {"xi_above_one", r.xi_above_one},
       {"negative_exponent", r.negative_exponent}};
  if (r.kappa) {
    j["kappa"] = num(*r.kappa);
    j["generalized_discrepancy"] = num(r.generalized_discrepancy);
    j["generalized_stderr"] = num(r.generalized_stderr);
    j["generalized_violated"] = r.generalized_violated;
  }
}

void to_json(Json& j, const TimeConstantEstimate& e) {
  Json rows = Json::array();
  for (const auto& s : e.per_n) {
    rows.push_back({{"n", s.n},
                    {"mean", num(s.mean)},
                    {"stderr", num(s.std_error)},
                    {"replicas", s.replicas},
                    {"truncated", s.truncated}});
  }
  j = {{"direction", e.direction},
       {"per_n", rows},
       {"g", num(e.g)},
       {"g_stderr", num(e.g_stderr)},
       {"method", e.method},
       {"warnings", e.warnings}};
}

void to_json(Json& j, const Measured& m) {
  j = {{"value", num(m.value)}, {"stderr", num(m.std_error)}};
}

void to_json(Json& j, const PerturbationCheck& c) {
  j = {{"left", num(c.left)},
       {"right", num(c.right)},
       {"left_stderr", num(c.left_stderr)},
       {"right_stderr", num(c.right_stderr)},
       {"escape_probability", num(c.escape_probability)},
       {"holds", c.holds},
       {"precondition_ok", c.precondition_ok},
       {"violating_index", c.violating_index},
       {"message", c.message}};
}

void to_json(Json& j, const VarianceBoundsReport& r) {
  Json reasons = Json::object();
  for (const auto& [k, v] : r.flag_reasons) reasons[k] = v;
  j = {{"records", r.records},
       {"flagged", r.flagged},
       {"flag_reasons", reasons},
       {"level", std::string(to_string(r.level))},
       {"var_delta", measured_or_null(r.var_delta)},
       {"var_delta_restricted", measured_or_null(r.var_delta_restricted)},
       {"twice_var_t1_restricted", measured_or_null(r.twice_var_t1_restricted)},
       {"iid_gap", measured_or_null(r.iid_gap)},
       {"corr_restricted", measured_or_null(r.corr_restricted)},
       {"var_delta_crossing", measured_or_null(r.var_delta_crossing)},
       {"four_x0_second_moment", measured_or_null(r.four_x0_second_moment)},
       {"escape_probability", measured_or_null(r.escape_probability)},
       {"upper_bound_holds", r.upper_bound_holds},
       {"independence_holds", r.independence_holds},
       {"iid_identity_holds", r.iid_identity_holds},
       {"warnings", r.warnings}};
  if (r.level != MeasurementLevel::kPlain) j["perturbation"] = r.perturbation;
}

void to_json(Json& j, const ScalingTable& t) {
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    rows.push_back({{"n", row.n},
                    {"replicas", row.replicas},
                    {"flagged", row.flagged},
                    {"var_delta", row.var_delta}});
  }
  j = {{"rows", rows},
       {"exponent", num(t.exponent)},
       {"exponent_stderr", num(t.exponent_stderr)},
       {"degenerate", t.degenerate},
       {"reference_lower", num(t.reference_lower)},
       {"reference_lower_stderr", num(t.reference_lower_stderr)},
       {"reference_upper", num(t.reference_upper)},
       {"warnings", t.warnings}};
}

}  // namespace fpplab
