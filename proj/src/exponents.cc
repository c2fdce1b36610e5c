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

#include "fpplab/exponents.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "fpplab/errors.h"
#include "fpplab/stats.h"

namespace fpplab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double per_n_statistic(ExponentFlavor flavor, std::span<const double> xs) {
  return flavor == ExponentFlavor::kChiVariance ? sample_variance(xs) : mean(xs);
}

double slope_to_exponent(ExponentFlavor flavor, double slope) {
  return flavor == ExponentFlavor::kChiVariance ? slope / 2.0 : slope;
}

std::vector<std::size_t> sizes_of(const std::vector<std::vector<double>>& samples) {
  std::vector<std::size_t> out;
  for (const auto& s : samples) out.push_back(s.size());
  return out;
}

// Shared body of fit_chi / fit_xi.
ExponentEstimate fit_from_samples(ExponentFlavor flavor, const std::vector<int>& n_grid,
                                  const std::vector<std::vector<double>>& samples,
                                  std::uint64_t bootstrap_seed) {
  if (samples.size() != n_grid.size()) {
    throw std::invalid_argument("one sample set per n is required");
  }
  std::vector<double> stat, se;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (samples[i].size() < 2) {
      throw InsufficientData(fmt::format("n={}: fewer than two samples", n_grid[i]));
    }
    const double v = per_n_statistic(flavor, samples[i]);
    if (!(v > 0.0)) {
      throw DegenerateEstimate(fmt::format("n={}: {} is {}", n_grid[i],
                                           flavor == ExponentFlavor::kChiVariance
                                               ? "variance" : "mean", v));
    }
    stat.push_back(v);
    se.push_back(flavor == ExponentFlavor::kChiVariance
                     ? variance_stderr(samples[i])
                     : summarize(samples[i]).stderr_mean);
  }
  ExponentEstimate est = fit_exponent_table(flavor, n_grid, stat, se, sizes_of(samples));

  // Bootstrap within each n; per-n weights stay at their full-sample values.
  std::vector<double> values;
  std::vector<double> boot(n_grid.size());
  std::vector<double> resample;
  for (int r = 0; r < kDefaultBootstrapResamples; ++r) {
    bool ok = true;
    for (std::size_t i = 0; i < n_grid.size() && ok; ++i) {
      const auto& xs = samples[i];
      resample.resize(xs.size());
      const std::uint64_t key = mix64(bootstrap_seed ^ mix64(static_cast<std::uint64_t>(n_grid[i])));
      for (std::size_t j = 0; j < xs.size(); ++j) {
        resample[j] = xs[bootstrap_index(key, r, j, xs.size())];
      }
      boot[i] = per_n_statistic(flavor, resample);
      ok = boot[i] > 0.0;
    }
    if (!ok) continue;
    std::vector<double> ns(n_grid.begin(), n_grid.end());
    values.push_back(slope_to_exponent(flavor, log_log_fit(ns, boot, se).slope));
  }
  // Report the larger of the resampling error and the residual-scaled fit
  // error: the latter also absorbs misfit across n that resampling within
  // each n cannot see.
  // The window check compares against sampling error alone.
  double sampling_error = est.std_error;
  if (values.size() >= 2) {
    sampling_error = std::sqrt(sample_variance(values));
    est.std_error = std::max(est.std_error, sampling_error);
  }

  if (std::isfinite(est.reduced_window_value) &&
      std::abs(est.reduced_window_value - est.value) >= 2.0 * sampling_error) {
    est.finite_size_warning = true;
    est.warnings.push_back(fmt::format(
        "dropping n={} moves the estimate from {:.4f} to {:.4f} (>= 2 stderr)",
        n_grid.front(), est.value, est.reduced_window_value));
  }
  return est;
}

std::vector<std::vector<double>> column(const GeodesicTable& table, bool deviation) {
  std::vector<std::vector<double>> out(table.samples.size());
  for (std::size_t i = 0; i < table.samples.size(); ++i) {
    for (const auto& s : table.samples[i]) out[i].push_back(deviation ? s.deviation : s.time);
  }
  return out;
}

double truncation_rate(const GeodesicTable& table) {
  std::size_t total = 0, truncated = 0;
  for (const auto& per_n : table.samples) {
    for (const auto& s : per_n) {
      ++total;
      truncated += s.truncated;
    }
  }
  return total ? static_cast<double>(truncated) / static_cast<double>(total) : 0.0;
}

}  // namespace

std::string_view to_string(ExponentFlavor flavor) {
  switch (flavor) {
    case ExponentFlavor::kChiVariance: return "chi_variance";
    case ExponentFlavor::kChiTail: return "chi_tail";
    case ExponentFlavor::kXiMean: return "xi_mean";
    case ExponentFlavor::kXiTail: return "xi_tail";
  }
  return "unknown";
}

ExponentFlavor exponent_flavor_from_string(std::string_view name) {
  if (name == "chi_variance") return ExponentFlavor::kChiVariance;
  if (name == "chi_tail") return ExponentFlavor::kChiTail;
  if (name == "xi_mean") return ExponentFlavor::kXiMean;
  if (name == "xi_tail") return ExponentFlavor::kXiTail;
  throw std::invalid_argument("unknown exponent flavor '" + std::string(name) + "'");
}

std::size_t default_replicas(int n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  const std::size_t scaled = (1000000 + static_cast<std::size_t>(n) - 1) / n;
  return std::max<std::size_t>(200, scaled);
}

void check_geometric_grid(const std::vector<int>& n_grid, std::size_t min_points) {
  if (n_grid.size() < min_points) {
    throw std::invalid_argument(
        fmt::format("n grid needs at least {} points, got {}", min_points, n_grid.size()));
  }
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw std::invalid_argument("n grid values must be positive");
    if (i == 0) continue;
    const double ratio = static_cast<double>(n_grid[i]) / n_grid[i - 1];
    if (!(ratio >= 1.2 && ratio <= 4.0)) {
      throw std::invalid_argument(fmt::format(
          "n grid is not geometric: ratio {} between {} and {}", ratio, n_grid[i - 1], n_grid[i]));
    }
  }
}

GeodesicTable collect_geodesic_table(const DistributionSpec& spec, std::uint64_t seed,
                                     const RealVector& direction,
                                     const std::vector<int>& n_grid,
                                     std::size_t replicas, int workers) {
  GeodesicTable table;
  table.direction = direction;
  table.n_grid = n_grid;
  for (int n : n_grid) {
    const std::size_t count = replicas ? replicas : default_replicas(n);
    table.samples.push_back(sample_geodesics(spec, seed, n, direction, count, workers));
  }
  return table;
}

ExponentEstimate fit_chi(const std::vector<int>& n_grid,
                         const std::vector<std::vector<double>>& samples,
                         std::uint64_t bootstrap_seed) {
  return fit_from_samples(ExponentFlavor::kChiVariance, n_grid, samples, bootstrap_seed);
}

ExponentEstimate fit_xi(const std::vector<int>& n_grid,
                        const std::vector<std::vector<double>>& samples,
                        std::uint64_t bootstrap_seed) {
  return fit_from_samples(ExponentFlavor::kXiMean, n_grid, samples, bootstrap_seed);
}

ExponentEstimate fit_exponent_table(ExponentFlavor flavor, const std::vector<int>& n_grid,
                                    const std::vector<double>& statistic,
                                    const std::vector<double>& statistic_stderr,
                                    const std::vector<std::size_t>& replicas) {
  if (statistic.size() != n_grid.size() ||
      (!statistic_stderr.empty() && statistic_stderr.size() != n_grid.size())) {
    throw std::invalid_argument("table columns differ in length");
  }
  if (n_grid.size() < 2) throw InsufficientData("need at least two scales to fit");
  for (std::size_t i = 0; i < statistic.size(); ++i) {
    if (!(statistic[i] > 0.0)) {
      throw DegenerateEstimate(fmt::format("n={}: statistic {} is not positive", n_grid[i],
                                           statistic[i]));
    }
  }
  ExponentEstimate est;
  est.flavor = flavor;
  est.n_grid = n_grid;
  est.statistic = statistic;
  est.statistic_stderr = statistic_stderr;
  est.replicas = replicas;
  est.window_lo = n_grid.front();
  est.window_hi = n_grid.back();
  const std::vector<double> ns(n_grid.begin(), n_grid.end());
  const LinearFit fit = log_log_fit(ns, statistic, statistic_stderr);
  est.value = slope_to_exponent(flavor, fit.slope);
  est.std_error = slope_to_exponent(flavor, fit.slope_stderr);
  est.r_squared = fit.r_squared;
  est.reduced_window_value = kNaN;
  if (n_grid.size() >= 3) {
    const auto tail = [](const auto& v) {
      return std::vector<typename std::decay_t<decltype(v)>::value_type>(v.begin() + 1, v.end());
    };
    const std::vector<double> se_tail =
        statistic_stderr.empty() ? std::vector<double>{} : tail(statistic_stderr);
    est.reduced_window_value =
        slope_to_exponent(flavor, log_log_fit(tail(ns), tail(statistic), se_tail).slope);
  }
  est.out_of_range = !(est.value >= 0.0 && est.value <= 1.5);
  if (est.out_of_range) {
    est.warnings.push_back(fmt::format("estimate {:.4f} outside [0, 1.5]", est.value));
  }
  return est;
}

ExponentEstimate estimate_chi(const GeodesicTable& table, std::uint64_t seed) {
  ExponentEstimate est = fit_chi(table.n_grid, column(table, false), seed);
  const double rate = truncation_rate(table);
  if (rate > 0.0) {
    est.warnings.push_back(fmt::format("{:.2f}% of geodesics truncated", 100.0 * rate));
  }
  return est;
}

ExponentEstimate estimate_xi(const GeodesicTable& table, std::uint64_t seed) {
  const double rate = truncation_rate(table);
  if (rate > 0.05) {
    throw UnreliableEstimate(fmt::format(
        "{:.2f}% of geodesics touched the box boundary (limit 5%)", 100.0 * rate));
  }
  ExponentEstimate est = fit_xi(table.n_grid, column(table, true), seed);
  if (rate > 0.0) {
    est.warnings.push_back(fmt::format("{:.2f}% of geodesics truncated", 100.0 * rate));
  }
  return est;
}

ExponentEstimate estimate_chi(const DistributionSpec& spec, std::uint64_t seed,
                              const RealVector& direction, const std::vector<int>& n_grid,
                              std::size_t replicas, int workers) {
  check_geometric_grid(n_grid, 5);
  if (!(spec.variance() > 0.0)) {
    throw DegenerateEstimate("weight law has zero variance; passage times are deterministic");
  }
  return estimate_chi(collect_geodesic_table(spec, seed, direction, n_grid, replicas, workers),
                      seed);
}

ExponentEstimate estimate_xi(const DistributionSpec& spec, std::uint64_t seed,
                             const RealVector& direction, const std::vector<int>& n_grid,
                             std::size_t replicas, int workers) {
  check_geometric_grid(n_grid, 5);
  return estimate_xi(collect_geodesic_table(spec, seed, direction, n_grid, replicas, workers),
                     seed);
}

std::vector<std::vector<double>> synthetic_power_law_samples(
    const std::vector<int>& n_grid, double exponent, SyntheticKind kind,
    std::size_t count, double noise, std::uint64_t seed, double scale) {
  if (count < 2) throw std::invalid_argument("synthetic samples need count >= 2");
  std::vector<std::vector<double>> out;
  for (int n : n_grid) {
    std::mt19937_64 rng(mix64(seed ^ mix64(static_cast<std::uint64_t>(n))));
    std::normal_distribution<double> normal;
    std::exponential_distribution<double> expo;
    double target = scale * std::pow(static_cast<double>(n), exponent);
    if (noise > 0.0) target *= std::max(0.05, 1.0 + noise * normal(rng));
    std::vector<double> xs(count);
    if (kind == SyntheticKind::kVariance) {
      for (double& x : xs) x = normal(rng);
      const double m = mean(xs);
      for (double& x : xs) x -= m;
      const double k = std::sqrt(target / sample_variance(xs));
      for (double& x : xs) x *= k;
    } else {
      for (double& x : xs) x = expo(rng);
      const double k = target / mean(xs);
      for (double& x : xs) x *= k;
    }
    out.push_back(std::move(xs));
  }
  return out;
}

bool TailReport::all_stable() const {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const std::string& v) { return v == "stable"; });
}

TailReport tail_diagnostic(const std::vector<int>& n_grid,
                           const std::vector<std::vector<double>>& samples,
                           double normalization_exponent,
                           const std::vector<double>& alpha_grid, bool center) {
  if (samples.size() != n_grid.size()) {
    throw std::invalid_argument("one sample set per n is required");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() < 500) {
      throw InsufficientData(fmt::format("n={}: {} samples, at least 500 required",
                                         n_grid[i], samples[i].size()));
    }
  }
  TailReport report;
  report.normalization_exponent = normalization_exponent;
  report.alpha_grid = alpha_grid;
  report.n_grid = n_grid;
  for (double alpha : alpha_grid) {
    std::vector<TailCell> row;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      const double m = center ? mean(samples[i]) : 0.0;
      const double norm = std::pow(static_cast<double>(n_grid[i]), normalization_exponent);
      CompensatedSum acc;
      TailCell cell;
      for (double x : samples[i]) {
        const double e = std::exp(alpha * std::abs(x - m) / norm);
        if (std::isinf(e)) cell.overflow = true;
        acc.add(e);
      }
      cell.moment = cell.overflow ? std::numeric_limits<double>::infinity()
                                  : acc.value() / static_cast<double>(samples[i].size());
      row.push_back(cell);
    }
    bool stable = true;
    double lowest = row.empty() ? 0.0 : row.front().moment;
    for (std::size_t j = 1; j < row.size(); ++j) {
      if (row[j].overflow || row[j].moment > 1.2 * lowest) stable = false;
      lowest = std::min(lowest, row[j].moment);
    }
    if (!row.empty() && row.front().overflow) stable = false;
    report.cells.push_back(std::move(row));
    report.verdicts.push_back(stable ? "stable" : "growing");
  }
  return report;
}

ExponentEstimate tail_exponent(ExponentFlavor flavor, const std::vector<int>& n_grid,
                               const std::vector<std::vector<double>>& samples,
                               const std::vector<double>& alpha_grid) {
  if (flavor != ExponentFlavor::kChiTail && flavor != ExponentFlavor::kXiTail) {
    throw std::invalid_argument("tail_exponent takes a tail flavor");
  }
  constexpr double kStep = 0.05;
  ExponentEstimate est;
  est.flavor = flavor;
  est.n_grid = n_grid;
  est.replicas = sizes_of(samples);
  est.window_lo = n_grid.empty() ? 0 : n_grid.front();
  est.window_hi = n_grid.empty() ? 0 : n_grid.back();
  est.reduced_window_value = kNaN;
  est.value = kNaN;
  for (int k = 0; k <= 20; ++k) {
    const double p = k * kStep;
    if (tail_diagnostic(n_grid, samples, p, alpha_grid, flavor == ExponentFlavor::kChiTail)
            .all_stable()) {
      est.value = p;
      break;
    }
  }
  est.std_error = kStep / 2.0;  // grid resolution
  if (std::isnan(est.value)) {
    est.out_of_range = true;
    est.warnings.push_back("no exponent in [0, 1] gives stable moments");
  }
  return est;
}

KpzReport check_kpz(const ExponentEstimate& chi, const ExponentEstimate& xi,
                    double kappa, double kappa_stderr) {
  KpzReport r = check_kpz(chi, xi, nullptr);
  if (!std::isfinite(kappa)) throw DegenerateEstimate("curvature exponent is not finite");
  const double ks = std::isfinite(kappa_stderr) ? kappa_stderr : 0.0;
  r.kappa = kappa;
  r.generalized_discrepancy = chi.value - (kappa * xi.value - (kappa - 1.0));
  r.generalized_stderr =
      std::sqrt(chi.std_error * chi.std_error + kappa * kappa * xi.std_error * xi.std_error +
                (xi.value - 1.0) * (xi.value - 1.0) * ks * ks);
  r.generalized_violated =
      std::abs(r.generalized_discrepancy) > std::max(2.0 * r.generalized_stderr, 1e-12);
  return r;
}

KpzReport check_kpz(const ExponentEstimate& chi, const ExponentEstimate& xi,
                    const CurvatureEstimate* curvature) {
  if (!std::isfinite(chi.value) || !std::isfinite(xi.value)) {
    throw DegenerateEstimate("relation check needs finite chi and xi");
  }
  if (curvature) {
    if (curvature->flat) throw DegenerateEstimate("flat direction has no curvature exponent");
    return check_kpz(chi, xi, curvature->kappa, curvature->kappa_stderr);
  }
  KpzReport r;
  r.chi = chi.value;
  r.xi = xi.value;
  r.discrepancy = chi.value - (2.0 * xi.value - 1.0);
  r.discrepancy_stderr =
      std::sqrt(chi.std_error * chi.std_error + 4.0 * xi.std_error * xi.std_error);
  // A tiny floor keeps exact arithmetic inputs (zero errors) from tripping
  // the flag on rounding.
  const double tol = std::max(2.0 * r.discrepancy_stderr, 1e-12);
  r.relation_violated = std::abs(r.discrepancy) > tol;
  r.chi_above_half = chi.value - 0.5 > std::max(2.0 * chi.std_error, 1e-12);
  r.xi_above_one = xi.value - 1.0 > std::max(2.0 * xi.std_error, 1e-12);
  r.negative_exponent = -chi.value > std::max(2.0 * chi.std_error, 1e-12) ||
                        -xi.value > std::max(2.0 * xi.std_error, 1e-12);
  r.generalized_discrepancy = r.discrepancy;
  r.generalized_stderr = r.discrepancy_stderr;
  r.generalized_violated = r.relation_violated;
  return r;
}

}  // namespace fpplab
