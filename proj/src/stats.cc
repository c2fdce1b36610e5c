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

#include "fpplab/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fpplab/environment.h"

namespace fpplab {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return sum(xs) / static_cast<double>(xs.size());
}

namespace {

double centered_square_sum(std::span<const double> xs) {
  const double m = mean(xs);
  CompensatedSum s;
  for (double x : xs) s.add((x - m) * (x - m));
  return s.value();
}

}  // namespace

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  return centered_square_sum(xs) / static_cast<double>(xs.size() - 1);
}

double population_variance(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return centered_square_sum(xs) / static_cast<double>(xs.size());
}

double lp_norm(std::span<const double> xs, double p) {
  if (xs.empty()) return 0.0;
  CompensatedSum s;
  for (double x : xs) s.add(std::pow(std::abs(x), p));
  return std::pow(s.value() / static_cast<double>(xs.size()), 1.0 / p);
}

double covariance(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("covariance: size mismatch");
  if (xs.size() < 2) return 0.0;
  const double mx = mean(xs);
  const double my = mean(ys);
  CompensatedSum s;
  for (std::size_t i = 0; i < xs.size(); ++i) s.add((xs[i] - mx) * (ys[i] - my));
  return s.value() / static_cast<double>(xs.size() - 1);
}

double correlation(std::span<const double> xs, std::span<const double> ys) {
  const double vx = sample_variance(xs);
  const double vy = sample_variance(ys);
  if (vx <= 0.0 || vy <= 0.0) return 0.0;
  return covariance(xs, ys) / std::sqrt(vx * vy);
}

double correlation_stderr(double r, std::size_t n) {
  if (n < 3) return std::numeric_limits<double>::infinity();
  return std::sqrt(std::max(0.0, 1.0 - r * r) / static_cast<double>(n - 2));
}

Summary summarize(std::span<const double> xs) {
  Summary s;
  s.count = xs.size();
  s.mean = mean(xs);
  s.variance = sample_variance(xs);
  s.stderr_mean = xs.empty() ? 0.0 : std::sqrt(s.variance / static_cast<double>(xs.size()));
  return s;
}

double variance_stderr(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 4) return 0.0;
  const double m = mean(xs);
  CompensatedSum s4;
  for (double x : xs) {
    const double d = (x - m) * (x - m);
    s4.add(d * d);
  }
  const double nd = static_cast<double>(n);
  const double m4 = s4.value() / nd;
  const double s2 = sample_variance(xs);
  const double v = (m4 - s2 * s2 * (nd - 3.0) / (nd - 1.0)) / nd;
  return std::sqrt(std::max(0.0, v));
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> weights) {
  if (x.size() != y.size() || (!weights.empty() && weights.size() != x.size())) {
    throw std::invalid_argument("linear_fit: size mismatch");
  }
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("linear_fit: need at least two points");
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

  CompensatedSum sw, sx, sy;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w(i) > 0.0) || !std::isfinite(w(i))) {
      throw std::invalid_argument("linear_fit: weights must be positive and finite");
    }
    sw.add(w(i));
    sx.add(w(i) * x[i]);
    sy.add(w(i) * y[i]);
  }
  const double xbar = sx.value() / sw.value();
  const double ybar = sy.value() / sw.value();
  CompensatedSum sxx, sxy, syy;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - xbar;
    const double dy = y[i] - ybar;
    sxx.add(w(i) * dx * dx);
    sxy.add(w(i) * dx * dy);
    syy.add(w(i) * dy * dy);
  }
  if (!(sxx.value() > 0.0)) {
    throw std::invalid_argument("linear_fit: x values must not all coincide");
  }
  LinearFit f;
  f.points = n;
  f.slope = sxy.value() / sxx.value();
  f.intercept = ybar - f.slope * xbar;

  CompensatedSum rss;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss.add(w(i) * r * r);
  }
  f.r_squared = syy.value() > 0.0 ? 1.0 - rss.value() / syy.value() : 1.0;
  if (n > 2) {
    // Residual-scaled errors; for inverse-variance weights with a good model
    // the scale factor is close to 1.
    const double s2 = rss.value() / static_cast<double>(n - 2);
    f.slope_stderr = std::sqrt(s2 / sxx.value());
    f.intercept_stderr = std::sqrt(s2 * (1.0 / sw.value() + xbar * xbar / sxx.value()));
  }
  return f;
}

LinearFit log_log_fit(std::span<const double> scale, std::span<const double> value,
                      std::span<const double> stderr_value) {
  if (scale.size() != value.size() ||
      (!stderr_value.empty() && stderr_value.size() != value.size())) {
    throw std::invalid_argument("log_log_fit: size mismatch");
  }
  std::vector<double> lx, ly, w;
  bool weighted = !stderr_value.empty();
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!(scale[i] > 0.0) || !(value[i] > 0.0)) {
      throw std::invalid_argument("log_log_fit: scales and values must be positive");
    }
    lx.push_back(std::log(scale[i]));
    ly.push_back(std::log(value[i]));
    if (weighted) {
      if (stderr_value[i] > 0.0) {
        const double rel = stderr_value[i] / value[i];
        w.push_back(1.0 / (rel * rel));
      } else {
        weighted = false;
      }
    }
  }
  if (!weighted) w.clear();
  return linear_fit(lx, ly, w);
}

std::size_t bootstrap_index(std::uint64_t seed, std::size_t r, std::size_t i,
                            std::size_t n) {
  const std::uint64_t h =
      mix64(mix64(seed ^ mix64(static_cast<std::uint64_t>(r) + 1)) +
            static_cast<std::uint64_t>(i));
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(h) * static_cast<unsigned __int128>(n)) >> 64);
}

double bootstrap_stderr(std::span<const double> xs,
                        const std::function<double(std::span<const double>)>& statistic,
                        std::uint64_t seed, int resamples) {
  if (xs.size() < 2 || resamples < 2) return 0.0;
  std::vector<double> resample(xs.size());
  std::vector<double> values;
  values.reserve(resamples);
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      resample[i] = xs[bootstrap_index(seed, r, i, xs.size())];
    }
    values.push_back(statistic(resample));
  }
  return std::sqrt(sample_variance(values));
}

double ks_statistic(std::span<const double> xs, const std::function<double(double)>& cdf) {
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample_statistic(std::span<const double> xs, std::span<const double> ys) {
  std::vector<double> a(xs.begin(), xs.end());
  std::vector<double> b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(double alpha, std::size_t n) {
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(static_cast<double>(n));
}

double ks_two_sample_critical_value(double alpha, std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) * std::sqrt((nn + mm) / (nn * mm));
}

}  // namespace fpplab
