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

// Fluctuation (chi) and transversal (xi) exponents from scaling fits, the
// exponential-moment tail diagnostic, and the chi = 2 xi - 1 relation check.

#ifndef FPPLAB_EXPONENTS_H_
#define FPPLAB_EXPONENTS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fpplab/environment.h"
#include "fpplab/sampling.h"
#include "fpplab/shape.h"

namespace fpplab {

enum class ExponentFlavor { kChiVariance, kChiTail, kXiMean, kXiTail };

std::string_view to_string(ExponentFlavor flavor);
ExponentFlavor exponent_flavor_from_string(std::string_view name);

struct ExponentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  ExponentFlavor flavor = ExponentFlavor::kChiVariance;
  std::vector<int> n_grid;
  std::vector<double> statistic;  // per-n variance or mean
  std::vector<double> statistic_stderr;
  std::vector<std::size_t> replicas;
  int window_lo = 0;  // smallest and largest n of the fit
  int window_hi = 0;
  double r_squared = 0.0;
  // Estimate after dropping the smallest n; NaN if the grid is too short.
  double reduced_window_value = 0.0;
  bool finite_size_warning = false;
  bool out_of_range = false;  // outside the diagnostic band [0, 1.5]
  std::vector<std::string> warnings;
};

// max(200, ceil(10^6 / n)).
std::size_t default_replicas(int n);

// Strictly increasing, at least `min_points` values, consecutive ratios in
// [1.2, 4].
void check_geometric_grid(const std::vector<int>& n_grid, std::size_t min_points);

struct GeodesicTable {
  RealVector direction;
  std::vector<int> n_grid;
  std::vector<std::vector<GeodesicSample>> samples;  // per n
};

// replicas == 0 selects default_replicas(n) for every n.
GeodesicTable collect_geodesic_table(const DistributionSpec& spec, std::uint64_t seed,
                                     const RealVector& direction,
                                     const std::vector<int>& n_grid,
                                     std::size_t replicas, int workers);

// chi = slope(log Var vs log n) / 2, weighted by the inverse variance of the
// log statistic. Bootstrap (200 resamples within each n) gives the error.
// Throws DegenerateEstimate when a per-n variance is 0.
ExponentEstimate fit_chi(const std::vector<int>& n_grid,
                         const std::vector<std::vector<double>>& samples,
                         std::uint64_t bootstrap_seed);
// xi = slope(log mean vs log n). Throws DegenerateEstimate when a mean is 0.
ExponentEstimate fit_xi(const std::vector<int>& n_grid,
                        const std::vector<std::vector<double>>& samples,
                        std::uint64_t bootstrap_seed);

// Fit from a per-n table alone (no resampling). The slope is halved for
// kChiVariance.
ExponentEstimate fit_exponent_table(ExponentFlavor flavor, const std::vector<int>& n_grid,
                                    const std::vector<double>& statistic,
                                    const std::vector<double>& statistic_stderr,
                                    const std::vector<std::size_t>& replicas);

// Throws UnreliableEstimate if more than 5% of geodesics were truncated.
ExponentEstimate estimate_chi(const GeodesicTable& table, std::uint64_t seed);
ExponentEstimate estimate_xi(const GeodesicTable& table, std::uint64_t seed);

ExponentEstimate estimate_chi(const DistributionSpec& spec, std::uint64_t seed,
                              const RealVector& direction, const std::vector<int>& n_grid,
                              std::size_t replicas, int workers = 1);
ExponentEstimate estimate_xi(const DistributionSpec& spec, std::uint64_t seed,
                             const RealVector& direction, const std::vector<int>& n_grid,
                             std::size_t replicas, int workers = 1);

enum class SyntheticKind { kVariance, kMean };

// Samples whose per-n sample variance (kVariance) or sample mean (kMean)
// equals scale * n^exponent exactly, optionally times (1 + noise * e) with e
// standard normal drawn once per n.
std::vector<std::vector<double>> synthetic_power_law_samples(
    const std::vector<int>& n_grid, double exponent, SyntheticKind kind,
    std::size_t count, double noise, std::uint64_t seed, double scale = 1.0);

struct TailCell {
  double moment = 0.0;
  bool overflow = false;
};

struct TailReport {
  double normalization_exponent = 0.0;
  std::vector<double> alpha_grid;
  std::vector<int> n_grid;
  std::vector<std::vector<TailCell>> cells;  // [alpha][n]
  std::vector<std::string> verdicts;         // "stable" or "growing", per alpha
  bool all_stable() const;
};

// Empirical E exp(alpha |X - mean| / n^p) per (alpha, n), or
// E exp(alpha X / n^p) for non-negative statistics when center is false. A
// sequence is "stable" when every entry after the first stays within 20% of
// the smallest earlier entry, "growing" otherwise (an overflowed cell counts
// as growing). Needs >= 500 samples per n.
TailReport tail_diagnostic(const std::vector<int>& n_grid,
                           const std::vector<std::vector<double>>& samples,
                           double normalization_exponent,
                           const std::vector<double>& alpha_grid, bool center = true);

// Smallest exponent on a 0.05 grid in [0, 1] at which every alpha is stable,
// reported with flavor kChiTail (centered passage times) or kXiTail
// (deviations, not centered).
ExponentEstimate tail_exponent(ExponentFlavor flavor, const std::vector<int>& n_grid,
                               const std::vector<std::vector<double>>& samples,
                               const std::vector<double>& alpha_grid);

struct KpzReport {
  double chi = 0.0;
  double xi = 0.0;
  double discrepancy = 0.0;  // chi - (2 xi - 1)
  double discrepancy_stderr = 0.0;
  bool relation_violated = false;  // |discrepancy| > 2 stderr
  bool chi_above_half = false;     // chi > 1/2 beyond 2 stderr
  bool xi_above_one = false;       // xi > 1 beyond 2 stderr
  bool negative_exponent = false;  // chi or xi < 0 beyond 2 stderr
  std::optional<double> kappa;
  double generalized_discrepancy = 0.0;  // chi - (kappa xi - (kappa - 1))
  double generalized_stderr = 0.0;
  bool generalized_violated = false;
};

// Throws DegenerateEstimate if an input value is not finite.
KpzReport check_kpz(const ExponentEstimate& chi, const ExponentEstimate& xi,
                    const CurvatureEstimate* curvature = nullptr);
// Same with a bare kappa and its error.
KpzReport check_kpz(const ExponentEstimate& chi, const ExponentEstimate& xi,
                    double kappa, double kappa_stderr);

}  // namespace fpplab

#endif  // FPPLAB_EXPONENTS_H_
