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

#include "fpplab/shape.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "fpplab/errors.h"
#include "fpplab/sampling.h"
#include "fpplab/stats.h"

namespace fpplab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_grid(const std::vector<int>& n_grid) {
  if (n_grid.empty()) throw std::invalid_argument("n grid is empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw std::invalid_argument("n grid values must be positive");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
      throw std::invalid_argument("n grid must be strictly increasing");
    }
  }
}

void check_direction(const RealVector& v) {
  if (v.size() < 2 || v.size() > static_cast<std::size_t>(kMaxDim)) {
    throw std::invalid_argument("direction dimension must be in [2, 4]");
  }
  if (!(euclidean_norm(v) > 0.0)) throw std::invalid_argument("direction must be nonzero");
}

ScaleStatistic scale_statistic(int n, const std::vector<GeodesicSample>& samples) {
  std::vector<double> times;
  times.reserve(samples.size());
  ScaleStatistic s;
  s.n = n;
  for (const auto& g : samples) {
    times.push_back(g.time);
    s.truncated += g.truncated;
  }
  const Summary sum = summarize(times);
  s.mean = sum.mean;
  s.std_error = sum.stderr_mean;
  s.replicas = samples.size();
  return s;
}

// Intercept of the weighted fit y ~ a + b x and its error propagated from the
// per-point standard errors.
std::pair<double, double> propagated_intercept(const std::vector<double>& x,
                                               const std::vector<double>& y,
                                               const std::vector<double>& se) {
  const bool weighted = std::all_of(se.begin(), se.end(), [](double s) { return s > 0.0; });
  std::vector<double> w(x.size(), 1.0);
  if (weighted) {
    for (std::size_t i = 0; i < x.size(); ++i) w[i] = 1.0 / (se[i] * se[i]);
  }
  const LinearFit fit = linear_fit(x, y, weighted ? std::span<const double>(w)
                                                  : std::span<const double>());
  CompensatedSum sw, sx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw.add(w[i]);
    sx.add(w[i] * x[i]);
  }
  const double xbar = sx.value() / sw.value();
  CompensatedSum sxx;
  for (std::size_t i = 0; i < x.size(); ++i) sxx.add(w[i] * (x[i] - xbar) * (x[i] - xbar));
  CompensatedSum var;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = w[i] / sw.value() - xbar * w[i] * (x[i] - xbar) / sxx.value();
    var.add(c * c * se[i] * se[i]);
  }
  return {fit.intercept, std::sqrt(var.value())};
}

bool is_axis(const LatticePoint& u) {
  int nonzero = 0;
  for (int i = 0; i < u.dim(); ++i) {
    if (u[i] != 0) {
      if (std::abs(u[i]) != 1) return false;
      ++nonzero;
    }
  }
  return nonzero == 1;
}

bool is_diagonal(const LatticePoint& u) {
  for (int i = 0; i < u.dim(); ++i) {
    if (std::abs(u[i]) != 1) return false;
  }
  return true;
}

LatticePoint tangent_for(const LatticePoint& u) {
  const int d = u.dim();
  if (is_axis(u)) {
    int axis = 0;
    while (u[axis] == 0) ++axis;
    return LatticePoint::unit(d, (axis + 1) % d);
  }
  // u_0 e_0 - u_1 e_1 is orthogonal to a diagonal u.
  LatticePoint t = LatticePoint::origin(d);
  t = t + LatticePoint::unit(d, 0) * u[0] - LatticePoint::unit(d, 1) * u[1];
  return t;
}

double norm_of(const LatticePoint& p) { return euclidean_norm(p.to_real()); }

}  // namespace

TimeConstantEstimate estimate_time_constant(const DistributionSpec& spec,
                                            std::uint64_t seed,
                                            const RealVector& direction,
                                            const std::vector<int>& n_grid,
                                            std::size_t replicas,
                                            const ShapeOptions& options) {
  check_grid(n_grid);
  check_direction(direction);
  if (replicas < 1) throw std::invalid_argument("replicas must be positive");
  std::vector<std::vector<GeodesicSample>> samples;
  for (int n : n_grid) {
    samples.push_back(sample_geodesics(spec, seed, n, direction, replicas, options.workers));
  }
  return time_constant_from_samples(direction, n_grid, samples, options);
}

TimeConstantEstimate time_constant_from_samples(
    const RealVector& direction, const std::vector<int>& n_grid,
    const std::vector<std::vector<GeodesicSample>>& samples, const ShapeOptions& options) {
  check_grid(n_grid);
  check_direction(direction);
  if (samples.size() != n_grid.size()) {
    throw std::invalid_argument("one sample set per n is required");
  }
  TimeConstantEstimate est;
  est.direction = direction;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const int n = n_grid[i];
    if (samples[i].empty()) throw InsufficientData(fmt::format("n={}: no samples", n));
    est.per_n.push_back(scale_statistic(n, samples[i]));
    if (est.per_n.back().truncated > 0) {
      est.warnings.push_back(fmt::format("n={}: {} of {} geodesics still touched the box",
                                         n, est.per_n.back().truncated, samples[i].size()));
    }
  }

  const ScaleStatistic& last = est.per_n.back();
  const double largest_g = last.mean / last.n;
  const double largest_se = last.std_error / last.n;
  est.g = largest_g;
  est.g_stderr = largest_se;
  est.method = "largest_n";
  if (!options.extrapolate || est.per_n.size() < 2) return est;

  std::vector<double> x, y, se;
  double bound = std::numeric_limits<double>::infinity();
  for (const auto& s : est.per_n) {
    x.push_back(std::pow(static_cast<double>(s.n), kAlexanderChiPrime - 1.0));
    y.push_back(s.mean / s.n);
    se.push_back(s.std_error / s.n);
    bound = std::min(bound, y.back() + se.back());
  }
  const auto [g, g_se] = propagated_intercept(x, y, se);
  if (g <= bound) {
    est.g = g;
    est.g_stderr = g_se;
    est.method = fmt::format("richardson(chi'={})", kAlexanderChiPrime);
  } else {
    est.warnings.push_back(
        "extrapolated g exceeded min(mean/n + stderr); using the largest-n mean");
  }
  return est;
}

bool detect_flat_direction(const CurvatureEstimate& curv) {
  if (curv.offsets.empty() || curv.gaps.size() != curv.offsets.size()) {
    throw std::invalid_argument("curvature estimate has no gaps");
  }
  const auto [lo, hi] = std::minmax_element(curv.offsets.begin(), curv.offsets.end());
  if (!(*lo > 0.0) || *hi < 10.0 * *lo) {
    throw std::invalid_argument("offset grid must span at least a decade");
  }
  for (std::size_t i = 0; i < curv.gaps.size(); ++i) {
    if (std::abs(curv.gaps[i]) > 2.0 * curv.gap_stderr[i]) return false;
  }
  return true;
}

std::vector<int> curvature_steps(const LatticePoint& u, const std::vector<double>& offsets,
                                 int n) {
  if (u.dim() < 2 || (!is_axis(u) && !is_diagonal(u))) {
    throw std::invalid_argument("curvature direction must be an axis or the main diagonal");
  }
  const double ratio = norm_of(u) / norm_of(tangent_for(u));
  std::vector<int> steps;
  for (double z : offsets) {
    if (!(z > 0.0) || z > kCurvatureValidityRadius) {
      throw std::invalid_argument(
          fmt::format("offset {} outside (0, {}]", z, kCurvatureValidityRadius));
    }
    const int k = std::max(1, static_cast<int>(std::lround(z * n * ratio)));
    if (std::find(steps.begin(), steps.end(), k) == steps.end()) steps.push_back(k);
  }
  if (steps.empty()) throw std::invalid_argument("no curvature offsets");
  std::sort(steps.begin(), steps.end());
  // Offsets are proportional to k.
  if (steps.back() < 10 * steps.front()) {
    throw std::invalid_argument(fmt::format(
        "offsets rounded at n={} span less than a decade; use a larger n", n));
  }
  return steps;
}

CurvatureEstimate estimate_curvature_exponent(const DistributionSpec& spec,
                                              std::uint64_t seed,
                                              const LatticePoint& u,
                                              const std::vector<double>& offsets,
                                              int n, std::size_t replicas,
                                              const ShapeOptions& options) {
  if (u.dim() < 2) throw std::invalid_argument("direction dimension must be >= 2");
  if (!is_axis(u) && !is_diagonal(u)) {
    throw std::invalid_argument("curvature direction must be an axis or the main diagonal");
  }
  if (n < 1 || replicas < 2) {
    throw std::invalid_argument("curvature needs n >= 1 and at least two replicas");
  }
  CurvatureEstimate est;
  est.direction = u;
  est.tangent = tangent_for(u);
  est.n = n;
  est.replicas = replicas;

  const double u_norm = norm_of(u);
  est.steps = curvature_steps(u, offsets, n);
  std::vector<LatticePoint> targets;
  for (int k : est.steps) {
    est.offsets.push_back(k * norm_of(est.tangent) / (n * u_norm));
    targets.push_back(u * n + est.tangent * k);
  }

  std::string id = fmt::format("curvature/n={}/u={}", n, u.to_string());
  const PairedDifferences diff = sample_paired_differences(
      spec, seed, id, u * n, targets, n * u_norm, replicas, options.workers);
  est.truncated = diff.truncated;
  if (diff.truncated > 0) {
    est.warnings.push_back(fmt::format("{} replicas kept touching the box", diff.truncated));
  }

  std::vector<std::vector<double>> scaled(targets.size());
  for (std::size_t k = 0; k < targets.size(); ++k) {
    for (double d : diff.differences[k]) scaled[k].push_back(d / n);
    const Summary s = summarize(scaled[k]);
    est.gaps.push_back(s.mean);
    est.gap_stderr.push_back(s.stderr_mean);
    if (s.mean < -2.0 * s.stderr_mean) {
      est.warnings.push_back(fmt::format("gap at |z|={} is materially negative", est.offsets[k]));
    }
  }

  est.kappa = kNaN;
  est.kappa_stderr = kNaN;
  est.flat = detect_flat_direction(est);
  if (est.flat) return est;

  std::vector<std::size_t> use;
  for (std::size_t k = 0; k < est.gaps.size(); ++k) {
    if (est.gaps[k] > 0.0) use.push_back(k);
  }
  if (use.size() < 2) {
    est.warnings.push_back("fewer than two positive gaps; no curvature fit");
    return est;
  }
  if (use.size() < est.gaps.size()) {
    est.warnings.push_back("non-positive gaps dropped from the curvature fit");
  }
  auto fit_for = [&](const std::vector<double>& gaps, const std::vector<double>& se) {
    std::vector<double> z, g, s;
    for (std::size_t k : use) {
      z.push_back(est.offsets[k]);
      g.push_back(gaps[k]);
      s.push_back(se[k]);
    }
    return log_log_fit(z, g, s);
  };
  const LinearFit fit = fit_for(est.gaps, est.gap_stderr);
  est.kappa = fit.slope;
  est.fit_r_squared = fit.r_squared;

  // Replica bootstrap: one index draw per resample shared by every offset,
  // since the gaps are measured on the same environments.
  std::vector<double> slopes;
  std::vector<double> gaps(est.gaps.size());
  for (int r = 0; r < kDefaultBootstrapResamples; ++r) {
    std::vector<CompensatedSum> acc(est.gaps.size());
    for (std::size_t i = 0; i < replicas; ++i) {
      const std::size_t j = bootstrap_index(seed ^ 0xc0ffeeULL, r, i, replicas);
      for (std::size_t k = 0; k < gaps.size(); ++k) acc[k].add(scaled[k][j]);
    }
    bool positive = true;
    for (std::size_t k = 0; k < gaps.size(); ++k) {
      gaps[k] = acc[k].value() / static_cast<double>(replicas);
    }
    for (std::size_t k : use) positive = positive && gaps[k] > 0.0;
    if (positive) slopes.push_back(fit_for(gaps, est.gap_stderr).slope);
  }
  est.kappa_stderr = slopes.size() >= 2 ? std::sqrt(sample_variance(slopes)) : kNaN;
  return est;
}

AlexanderGapCurve alexander_gap(const DistributionSpec& spec, std::uint64_t seed,
                                const RealVector& direction,
                                const std::vector<int>& n_grid, std::size_t replicas,
                                const TimeConstantEstimate& g_ref,
                                const ShapeOptions& options) {
  check_grid(n_grid);
  check_direction(direction);
  if (g_ref.per_n.empty() || g_ref.per_n.back().n < 4 * n_grid.back()) {
    throw std::invalid_argument(
        "g_ref must come from a scale at least four times the largest n");
  }
  AlexanderGapCurve curve;
  curve.direction = direction;
  curve.g_ref = g_ref.g;
  for (int n : n_grid) {
    const auto samples = sample_geodesics(spec, seed, n, direction, replicas, options.workers);
    const ScaleStatistic s = scale_statistic(n, samples);
    AlexanderGapPoint p;
    p.n = n;
    p.mean = s.mean;
    p.gap = std::abs(s.mean - n * g_ref.g);
    p.gap_stderr = std::hypot(s.std_error, n * g_ref.g_stderr);
    curve.points.push_back(p);
  }
  for (std::size_t j = 1; j < curve.points.size(); ++j) {
    const auto& a = curve.points[j - 1];
    const auto& b = curve.points[j];
    const double slack = 2.0 * std::hypot(a.gap_stderr / a.n, b.gap_stderr / b.n);
    if (b.gap / b.n > a.gap / a.n + slack) curve.sublinear = false;
  }

  curve.exponent = kNaN;
  curve.exponent_stderr = kNaN;
  const bool positive = std::all_of(curve.points.begin(), curve.points.end(),
                                    [](const AlexanderGapPoint& p) { return p.gap > 0.0; });
  if (!positive || curve.points.size() < 2) {
    curve.warnings.push_back("a gap vanishes or too few points; no growth exponent");
    return curve;
  }
  std::vector<double> ns, gaps, se;
  for (const auto& p : curve.points) {
    ns.push_back(p.n);
    gaps.push_back(p.gap);
    se.push_back(p.gap_stderr);
  }
  const LinearFit fit = log_log_fit(ns, gaps, se);
  curve.exponent = fit.slope;
  curve.exponent_stderr = fit.slope_stderr;
  return curve;
}

}  // namespace fpplab
