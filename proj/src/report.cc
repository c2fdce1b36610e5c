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

// Summaries, tables and plots built from a finished artifacts directory.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "fpplab/errors.h"
#include "fpplab/exponents.h"
#include "fpplab/harness.h"
#include "fpplab/lattice.h"
#include "fpplab/stats.h"

namespace fpplab {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string xml_escape(const std::string& s) {
  std::string r;
  for (char c : s) {
    switch (c) {
      case '&': r += "&amp;"; break;
      case '<': r += "&lt;"; break;
      case '>': r += "&gt;"; break;
      case '"': r += "&quot;"; break;
      default: r += c;
    }
  }
  return r;
}

// Fixed precision keeps CSV output stable across runs and platforms.
std::string num(double v) {
  if (!std::isfinite(v)) return "nan";
  return fmt::format("{:.10g}", v);
}

std::string direction_label(const RealVector& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + num(v[i]);
  return s;
}

std::string pm(double v, double se) { return fmt::format("{:.4f} ± {:.4f}", v, se); }

// Writes a plot of statistic against n with the WLS line of the fit.
void exponent_plot(const fs::path& path, const std::string& title, const std::string& ylabel,
                   const ExponentEstimate& est, double slope_scale) {
  std::vector<double> x(est.n_grid.begin(), est.n_grid.end());
  const LinearFit f = log_log_fit(x, est.statistic, est.statistic_stderr);
  write_file(path, loglog_svg(title, "n", ylabel, x, est.statistic, slope_scale * est.value,
                              slope_scale * est.std_error, f.intercept));
}

struct Loaded {
  ExperimentConfig config;
  std::vector<TaskKey> tasks;
  std::vector<Json> payloads;  // in task order
};

Loaded load_run(const fs::path& dir) {
  const Json manifest = read_manifest(dir);
  if (manifest.value("status", "") != "complete") {
    throw IncompleteRun(dir.string() + ": run is not complete; rerun the same command to resume");
  }
  Loaded l;
  l.config = parse_config(manifest.at("config"));
  l.tasks = enumerate_tasks(l.config);
  const auto records = read_records(dir / "records.jsonl");
  if (records.empty() || l.tasks.empty()) {
    throw InsufficientData(dir.string() + ": no records to summarise");
  }
  std::map<std::string, const Json*> by_key;
  for (const auto& r : records) by_key[r.key.dump()] = &r.payload;
  for (const auto& t : l.tasks) {
    const auto it = by_key.find(t.canonical());
    if (it == by_key.end()) throw IncompleteRun(dir.string() + ": missing task " + t.canonical());
    l.payloads.push_back(*it->second);
  }
  return l;
}

Json report_exponents(const fs::path& dir, const Loaded& l, std::string& text) {
  const ExperimentConfig& c = l.config;
  GeodesicTable table;
  table.direction = c.direction;
  table.n_grid = c.n_grid;
  table.samples.resize(c.n_grid.size());
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < c.n_grid.size(); ++i) index[c.n_grid[i]] = i;
  for (std::size_t k = 0; k < l.tasks.size(); ++k) {
    table.samples[index.at(l.tasks[k].n)].push_back(l.payloads[k].get<GeodesicSample>());
  }

  Json summary = {{"experiment", c.experiment}};
  std::string csv = "flavor,n,statistic,stderr,replicas\n";
  std::optional<ExponentEstimate> chi, xi;
  const auto attempt = [&](const char* name, auto&& fn, std::optional<ExponentEstimate>& slot) {
    try {
      slot = fn();
      summary[name] = *slot;
    } catch (const std::exception& e) {
      summary[name] = {{"error", e.what()}};
      text += fmt::format("{}: not estimated ({})\n", name, e.what());
    }
  };
  attempt("chi", [&] { return estimate_chi(table, mix64(c.seed ^ 0xc41)); }, chi);
  attempt("xi", [&] { return estimate_xi(table, mix64(c.seed ^ 0x811)); }, xi);

  for (const auto* e : {&chi, &xi}) {
    if (!*e) continue;
    const ExponentEstimate& est = **e;
    for (std::size_t i = 0; i < est.n_grid.size(); ++i) {
      csv += fmt::format("{},{},{},{},{}\n", to_string(est.flavor), est.n_grid[i],
                         num(est.statistic[i]), num(est.statistic_stderr[i]), est.replicas[i]);
    }
  }
  write_file(dir / "exponents.csv", csv);
  if (chi) {
    text += fmt::format("chi = {}\n", pm(chi->value, chi->std_error));
    exponent_plot(dir / "variance_vs_n.svg", "Var T(0, n v) against n", "Var T", *chi, 2.0);
  }
  if (xi) {
    text += fmt::format("xi = {}\n", pm(xi->value, xi->std_error));
    exponent_plot(dir / "deviation_vs_n.svg", "Mean geodesic deviation against n", "E D", *xi,
                  1.0);
  }
  if (chi && xi) {
    const KpzReport k = check_kpz(*chi, *xi);
    summary["kpz"] = k;
    text += fmt::format("chi - (2 xi - 1) = {}\n", pm(k.discrepancy, k.discrepancy_stderr));
  }

  // Tail-based chi when every n has enough samples for the diagnostic.
  bool enough = true;
  std::vector<std::vector<double>> times(table.samples.size());
  for (std::size_t i = 0; i < table.samples.size(); ++i) {
    enough = enough && table.samples[i].size() >= 500;
    for (const auto& s : table.samples[i]) times[i].push_back(s.time);
  }
  if (enough) {
    try {
      const ExponentEstimate tail =
          tail_exponent(ExponentFlavor::kChiTail, c.n_grid, times, {0.5, 1.0, 2.0});
      summary["chi_tail"] = tail;
      text += fmt::format("chi (tail) = {}\n", pm(tail.value, tail.std_error));
    } catch (const std::exception& e) {
      summary["chi_tail"] = {{"error", e.what()}};
    }
  }
  return summary;
}

Json report_shape(const fs::path& dir, const Loaded& l, std::string& text) {
  const ExperimentConfig& c = l.config;
  std::vector<std::vector<GeodesicSample>> samples(c.n_grid.size());
  for (std::size_t k = 0; k < l.tasks.size(); ++k) {
    const auto pos = std::find(c.n_grid.begin(), c.n_grid.end(), l.tasks[k].n) - c.n_grid.begin();
    samples[pos].push_back(l.payloads[k].get<GeodesicSample>());
  }
  ShapeOptions opts;
  opts.extrapolate = c.extrapolate;
  const TimeConstantEstimate est = time_constant_from_samples(c.direction, c.n_grid, samples, opts);
  std::string csv = "direction,n,mean,stderr,replicas\n";
  for (const auto& s : est.per_n) {
    csv += fmt::format("{},{},{},{},{}\n", direction_label(c.direction), s.n, num(s.mean),
                       num(s.std_error), s.replicas);
  }
  write_file(dir / "shape.csv", csv);
  text += fmt::format("g({}) = {} [{}]\n", direction_label(c.direction), pm(est.g, est.g_stderr),
                      est.method);
  return {{"experiment", "shape"}, {"time_constant", est}};
}

Json report_kappa(const fs::path& dir, const Loaded& l, std::string& text) {
  const CurvatureEstimate est = l.payloads.front().get<CurvatureEstimate>();
  std::string csv = "direction,offset,gap,stderr,replicas\n";
  std::vector<double> u;
  for (int i = 0; i < est.direction.dim(); ++i) u.push_back(est.direction[i]);
  for (std::size_t i = 0; i < est.offsets.size(); ++i) {
    csv += fmt::format("{},{},{},{},{}\n", direction_label(u), num(est.offsets[i]),
                       num(est.gaps[i]), num(est.gap_stderr[i]), est.replicas);
  }
  write_file(dir / "kappa.csv", csv);
  if (est.flat) {
    text += fmt::format("direction {} is flat: no curvature exponent\n", direction_label(u));
  } else {
    text += fmt::format("kappa = {}\n", pm(est.kappa, est.kappa_stderr));
  }
  std::vector<double> x, y, se;
  for (std::size_t i = 0; i < est.gaps.size(); ++i) {
    if (est.gaps[i] > 0.0) {
      x.push_back(est.offsets[i]);
      y.push_back(est.gaps[i]);
      se.push_back(est.gap_stderr[i]);
    }
  }
  if (std::isfinite(est.kappa) && x.size() >= 2) {
    const LinearFit f = log_log_fit(x, y, se);
    write_file(dir / "kappa_fit.svg", loglog_svg("Shape gap against offset", "|z|",
                                                 "g(u + z) - g(u)", x, y, est.kappa,
                                                 est.kappa_stderr, f.intercept));
  }
  return {{"experiment", "kappa"}, {"curvature", est}, {"flat", est.flat}};
}

Json report_cylinder(const fs::path& dir, const Loaded& l, std::string& text) {
  std::vector<CylinderReplicaRecord> records;
  for (const auto& p : l.payloads) records.push_back(p.get<CylinderReplicaRecord>());
  std::size_t violations = 0;
  Json messages = Json::array();
  for (const auto& r : records) {
    for (const auto& m : check_record_invariants(r)) {
      ++violations;
      if (messages.size() < 20) messages.push_back(fmt::format("replica {}: {}", r.replica, m));
    }
  }
  Json summary = {{"experiment", "cylinder"},
                  {"records", records.size()},
                  {"invariant_violations", violations},
                  {"violation_examples", messages}};
  text += fmt::format("invariant violations: {}\n", violations);
  std::string csv = "quantity,value,stderr\n";
  try {
    const VarianceBoundsReport rep = aggregate(records, mix64(l.config.seed ^ 0xa66));
    summary["aggregate"] = rep;
    const std::pair<const char*, Measured> rows[] = {
        {"var_delta", rep.var_delta},
        {"var_delta_restricted", rep.var_delta_restricted},
        {"twice_var_t1_restricted", rep.twice_var_t1_restricted},
        {"iid_gap", rep.iid_gap},
        {"corr_restricted", rep.corr_restricted},
        {"var_delta_crossing", rep.var_delta_crossing},
        {"four_x0_second_moment", rep.four_x0_second_moment},
        {"escape_probability", rep.escape_probability},
        {"perturbation_left", {rep.perturbation.left, rep.perturbation.left_stderr}},
        {"perturbation_right", {rep.perturbation.right, rep.perturbation.right_stderr}}};
    for (const auto& [name, m] : rows) {
      csv += fmt::format("{},{},{}\n", name, num(m.value), num(m.std_error));
    }
    text += fmt::format("flagged: {} of {}\n", rep.flagged, rep.records);
    text += fmt::format("Var dT = {}\n", pm(rep.var_delta.value, rep.var_delta.std_error));
    if (std::isfinite(rep.four_x0_second_moment.value)) {
      text += fmt::format("4 E[X0^2] = {}\n",
                          pm(rep.four_x0_second_moment.value, rep.four_x0_second_moment.std_error));
    }
    if (std::isfinite(rep.corr_restricted.value)) {
      text += fmt::format("corr(T1', T2') = {}\n",
                          pm(rep.corr_restricted.value, rep.corr_restricted.std_error));
      text += fmt::format("Var dT' - 2 Var T1' = {}\n",
                          pm(rep.iid_gap.value, rep.iid_gap.std_error));
    }
  } catch (const std::exception& e) {
    summary["aggregate_error"] = e.what();
    text += fmt::format("aggregate not available: {}\n", e.what());
  }
  write_file(dir / "cylinder.csv", csv);
  return summary;
}

Json report_sweep(const fs::path& dir, const Loaded& l, std::string& text) {
  const ExperimentConfig& c = l.config;
  std::vector<std::vector<double>> deltas(c.n_grid.size());
  std::vector<std::size_t> flagged(c.n_grid.size(), 0);
  for (std::size_t k = 0; k < l.tasks.size(); ++k) {
    const auto pos = std::find(c.n_grid.begin(), c.n_grid.end(), l.tasks[k].n) - c.n_grid.begin();
    const auto r = l.payloads[k].get<CylinderReplicaRecord>();
    if (r.flagged) {
      ++flagged[pos];
    } else {
      deltas[pos].push_back(r.delta);
    }
  }
  ScalingTable t = fit_variance_scaling(c.n_grid, deltas, mix64(c.seed ^ 0x5eed));
  for (std::size_t i = 0; i < t.rows.size(); ++i) t.rows[i].flagged = flagged[i];
  t.reference_upper = 2.0 * (2.0 * c.xi_prime - c.beta);
  std::string csv = "n,var_delta,stderr,replicas,flagged\n";
  std::vector<double> x, y, se;
  for (const auto& r : t.rows) {
    csv += fmt::format("{},{},{},{},{}\n", r.n, num(r.var_delta.value), num(r.var_delta.std_error),
                       r.replicas, r.flagged);
    x.push_back(r.n);
    y.push_back(r.var_delta.value);
    se.push_back(r.var_delta.std_error);
  }
  write_file(dir / "sweep.csv", csv);
  if (!t.degenerate) {
    const LinearFit f = log_log_fit(x, y, se);
    write_file(dir / "delta_variance_vs_n.svg",
               loglog_svg("Var dT against n", "n", "Var dT", x, y, t.exponent, t.exponent_stderr,
                          f.intercept));
    text += fmt::format("Var dT exponent = {} (upper reference {:.3f})\n",
                        pm(t.exponent, t.exponent_stderr), t.reference_upper);
  } else {
    text += "Var dT exponent: degenerate (zero variance)\n";
  }
  return {{"experiment", "sweep"}, {"scaling", t}};
}

double jnum(const Json& j, const char* key) {
  return j.contains(key) ? number_from_json(j.at(key)) : std::nan("");
}

}  // namespace

Json emit_report(const fs::path& dir) {
  const Loaded l = load_run(dir);
  std::string text = fmt::format("experiment {} seed {} config {}\n", l.config.experiment,
                                 l.config.seed, config_hash(l.config));
  Json summary;
  const std::string& e = l.config.experiment;
  if (e == "chi" || e == "xi") {
    summary = report_exponents(dir, l, text);
  } else if (e == "shape") {
    summary = report_shape(dir, l, text);
  } else if (e == "kappa") {
    summary = report_kappa(dir, l, text);
  } else if (e == "cylinder") {
    summary = report_cylinder(dir, l, text);
  } else {
    summary = report_sweep(dir, l, text);
  }
  summary["schema_version"] = kManifestSchemaVersion;
  summary["config_hash"] = config_hash(l.config);
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  write_file(dir / "summary.txt", text);
  return summary;
}

CheckOutcome check_artifacts(const fs::path& dir) {
  Json s;
  {
    std::ifstream in(dir / "summary.json");
    if (in) s = Json::parse(in, nullptr, false);
    if (!in || s.is_discarded()) s = emit_report(dir);
  }
  CheckOutcome out;
  const auto check = [&](bool ok, const std::string& what) {
    out.lines.push_back((ok ? "PASS " : "FAIL ") + what);
    out.passed = out.passed && ok;
  };
  const std::string e = s.value("experiment", "");
  if (e == "chi" || e == "xi") {
    const Json& chi = s.at("chi");
    const Json& xi = s.at("xi");
    const double cv = jnum(chi, "value"), cs = jnum(chi, "stderr");
    const double xv = jnum(xi, "value"), xs = jnum(xi, "stderr");
    check(std::isfinite(cv) && cv >= -2 * cs && cv <= 0.5 + 2 * cs,
          fmt::format("chi = {:.4f} within [0, 1/2] up to 2 se", cv));
    check(std::isfinite(xv) && xv >= 0.5 - 2 * xs && xv <= 1.0 + 2 * xs,
          fmt::format("xi = {:.4f} within [1/2, 1] up to 2 se", xv));
    if (s.contains("kpz")) {
      const double d = jnum(s.at("kpz"), "discrepancy");
      const double ds = jnum(s.at("kpz"), "discrepancy_stderr");
      check(std::abs(d) <= std::max(2 * ds, 0.15),
            fmt::format("|chi - (2 xi - 1)| = {:.4f} <= max(2 se, 0.15)", std::abs(d)));
    }
  } else if (e == "shape") {
    const Json& t = s.at("time_constant");
    const double g = jnum(t, "g");
    check(std::isfinite(g) && g > 0.0, fmt::format("time constant g = {:.6f} is positive", g));
  } else if (e == "kappa") {
    if (s.value("flat", false)) {
      check(true, "flat direction detected");
    } else {
      const double k = jnum(s.at("curvature"), "kappa");
      const double ks = jnum(s.at("curvature"), "kappa_stderr");
      check(std::isfinite(k) && k >= 1.0 - 2 * ks,
            fmt::format("kappa = {:.4f} >= 1 up to 2 se", k));
    }
  } else if (e == "cylinder") {
    const auto v = s.value("invariant_violations", std::size_t{1});
    check(v == 0, fmt::format("pathwise invariants: {} violations", v));
    if (!s.contains("aggregate")) {
      check(false, "aggregate: " + s.value("aggregate_error", std::string("missing")));
    } else {
      const Json& a = s.at("aggregate");
      const std::string level = a.value("level", "plain");
      if (level == "full") check(a.value("upper_bound_holds", false), "Var dT <= 4 E[X0^2]");
      if (level != "plain") {
        check(a.value("independence_holds", false), "|corr(T1', T2')| < 3 se");
        check(a.value("iid_identity_holds", false), "Var dT' = 2 Var T1' within 3 se");
        check(a.at("perturbation").value("holds", false), "variance perturbation inequality");
      }
    }
  } else if (e == "sweep") {
    const Json& t = s.at("scaling");
    const bool degenerate = t.value("degenerate", true);
    const double x = jnum(t, "exponent");
    const double hi = jnum(t, "reference_upper") + 0.3;
    check(!degenerate && std::isfinite(x) && x <= hi,
          fmt::format("Var dT exponent {:.4f} <= {:.3f}", x, hi));
  } else {
    check(false, "summary.json names no known experiment");
  }
  return out;
}

std::string loglog_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<double>& x,
                       const std::vector<double>& y, double slope, double slope_stderr,
                       double intercept) {
  constexpr double kW = 640, kH = 480, kL = 80, kR = 30, kT = 50, kB = 60;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] > 0 && y[i] > 0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log10(x[i]));
      ly.push_back(std::log10(y[i]));
    }
  }
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!lx.empty()) {
    x0 = *std::min_element(lx.begin(), lx.end());
    x1 = *std::max_element(lx.begin(), lx.end());
    y0 = *std::min_element(ly.begin(), ly.end());
    y1 = *std::max_element(ly.begin(), ly.end());
  }
  // Include the fitted line's endpoints in the y range.
  const double ln10 = std::log(10.0);
  const auto fit_at = [&](double lxv) { return (intercept + slope * lxv * ln10) / ln10; };
  if (std::isfinite(slope) && std::isfinite(intercept)) {
    y0 = std::min({y0, fit_at(x0), fit_at(x1)});
    y1 = std::max({y1, fit_at(x0), fit_at(x1)});
  }
  if (x1 - x0 < 1e-9) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
  const double px = (x1 - x0) * 0.05, py = (y1 - y0) * 0.08;
  x0 -= px; x1 += px; y0 -= py; y1 += py;
  const auto sx = [&](double v) { return kL + (v - x0) / (x1 - x0) * (kW - kL - kR); };
  const auto sy = [&](double v) { return kH - kB - (v - y0) / (y1 - y0) * (kH - kT - kB); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"13\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
      kW, kH);
  svg += fmt::format("<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
                     kW / 2, xml_escape(title));
  svg += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kL,
      kT, kW - kL - kR, kH - kT - kB);
  // Decade ticks, or the data extremes when the range is under a decade.
  const auto ticks = [](double lo, double hi) {
    std::vector<double> t;
    for (double v = std::ceil(lo); v <= std::floor(hi); v += 1.0) t.push_back(v);
    if (t.size() < 2) t = {lo + (hi - lo) * 0.1, lo + (hi - lo) * 0.9};
    return t;
  };
  for (double t : ticks(x0, x1)) {
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", sx(t),
                       kH - kB + 18, std::pow(10.0, t));
  }
  for (double t : ticks(y0, y1)) {
    svg += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", kL - 6,
                       sy(t) + 4, std::pow(10.0, t));
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{} (log)</text>\n",
                     (kL + kW - kR) / 2, kH - 18, xml_escape(x_label));
  svg += fmt::format(
      "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1} "
      "(log)</text>\n",
      (kT + kH - kB) / 2, xml_escape(y_label));
  if (std::isfinite(slope) && std::isfinite(intercept) && !lx.empty()) {
    const double c = *std::min_element(lx.begin(), lx.end());
    const double b = *std::max_element(lx.begin(), lx.end());
    svg += fmt::format(
        "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#c03\" "
        "stroke-width=\"1.5\"/>\n",
        sx(c), sy(fit_at(c)), sx(b), sy(fit_at(b)));
  }
  for (std::size_t i = 0; i < lx.size(); ++i) {
    svg += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"4\" fill=\"#036\"/>\n", sx(lx[i]),
                       sy(ly[i]));
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\">slope {:.3f} ± {:.3f}</text>\n", kL + 10, kT + 20,
                     slope, slope_stderr);
  svg += "</svg>\n";
  return svg;
}

}  // namespace fpplab
