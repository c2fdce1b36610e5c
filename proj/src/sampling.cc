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

#include "fpplab/sampling.h"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "fpplab/geodesic.h"
#include "fpplab/parallel.h"

namespace fpplab {

std::string geodesic_experiment_id(int n, const RealVector& direction) {
  std::string key = fmt::format("geodesic/n={}/dir=", n);
  for (std::size_t i = 0; i < direction.size(); ++i) {
    if (i) key += ',';
    key += fmt::format("{}", direction[i]);
  }
  return key;
}

LatticePoint scaled_endpoint(int n, const RealVector& direction) {
  RealVector x(direction.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = n * direction[i];
  return floor_point(x);
}

std::vector<GeodesicSample> sample_geodesics(const DistributionSpec& spec,
                                             std::uint64_t seed, int n,
                                             const RealVector& direction,
                                             std::size_t count, int workers,
                                             std::size_t first) {
  if (n < 1) throw std::invalid_argument("scale n must be positive");
  const LatticePoint target = scaled_endpoint(n, direction);
  const LatticePoint origin = LatticePoint::origin(target.dim());
  const std::string id = geodesic_experiment_id(n, direction);
  const double scale = n * euclidean_norm(direction);
  std::vector<GeodesicSample> out(count);
  parallel_for(count, workers, [&](std::size_t i) {
    const Environment env(spec, derive_replica_seed(seed, id, first + i), target.dim());
    const ScaledPathResult r = passage_time_at_scale(env, origin, target, scale);
    GeodesicSample& s = out[i];
    s.time = r.path.time;
    s.deviation = max_transversal_deviation(r.path, origin, target);
    s.truncated = r.truncation_warning;
    s.retries = r.retries;
  });
  return out;
}

PairedDifferences sample_paired_differences(const DistributionSpec& spec,
                                            std::uint64_t seed,
                                            const std::string& experiment_id,
                                            const LatticePoint& base,
                                            const std::vector<LatticePoint>& targets,
                                            double scale, std::size_t count,
                                            int workers) {
  const int d = base.dim();
  const LatticePoint origin = LatticePoint::origin(d);
  std::vector<LatticePoint> points = {origin, base};
  points.insert(points.end(), targets.begin(), targets.end());
  std::vector<LatticePoint> ends(points.begin() + 1, points.end());

  PairedDifferences out;
  out.differences.assign(targets.size(), std::vector<double>(count));
  out.base_times.assign(count, 0.0);
  std::vector<std::uint8_t> truncated(count, 0);
  parallel_for(count, workers, [&](std::size_t r) {
    const Environment env(spec, derive_replica_seed(seed, experiment_id, r), d);
    int margin = standard_margin(scale);
    for (int attempt = 0;; ++attempt) {
      const BoxRegion box = BoxRegion::bounding(points).inflated(margin);
      BoxWeights weights(env, box);
      ShortestPathSearch search(weights);
      search.run(origin, ends);
      bool touched = false;
      for (const LatticePoint& p : ends) touched = touched || search.path_to(p).touched_boundary;
      if (!touched || attempt == 2) {
        const double t0 = search.distance(base);
        out.base_times[r] = t0;
        for (std::size_t k = 0; k < targets.size(); ++k) {
          out.differences[k][r] = search.distance(targets[k]) - t0;
        }
        truncated[r] = touched;
        return;
      }
      margin *= 2;
    }
  });
  for (auto t : truncated) out.truncated += t;
  return out;
}

}  // namespace fpplab
