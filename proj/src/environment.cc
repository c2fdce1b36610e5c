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

#include "fpplab/environment.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "fpplab/errors.h"

namespace fpplab {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

std::string_view to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::kExponential: return "exponential";
    case DistributionKind::kUniform: return "uniform";
    case DistributionKind::kGamma: return "gamma";
    case DistributionKind::kDiscrete: return "discrete";
  }
  return "unknown";
}

DistributionKind distribution_kind_from_string(std::string_view name) {
  if (name == "exponential") return DistributionKind::kExponential;
  if (name == "uniform") return DistributionKind::kUniform;
  if (name == "gamma") return DistributionKind::kGamma;
  if (name == "discrete") return DistributionKind::kDiscrete;
  throw std::invalid_argument("unknown distribution kind '" + std::string(name) + "'");
}

DistributionSpec DistributionSpec::exponential(double rate) {
  DistributionSpec s;
  s.kind = DistributionKind::kExponential;
  s.rate = rate;
  s.check_well_formed();
  return s;
}

DistributionSpec DistributionSpec::uniform(double lower, double upper) {
  DistributionSpec s;
  s.kind = DistributionKind::kUniform;
  s.lower = lower;
  s.upper = upper;
  s.check_well_formed();
  return s;
}

DistributionSpec DistributionSpec::gamma(double shape, double scale) {
  DistributionSpec s;
  s.kind = DistributionKind::kGamma;
  s.shape = shape;
  s.scale = scale;
  s.check_well_formed();
  return s;
}

DistributionSpec DistributionSpec::discrete(std::vector<Atom> atoms) {
  DistributionSpec s;
  s.kind = DistributionKind::kDiscrete;
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.value < b.value; });
  s.atoms = std::move(atoms);
  s.check_well_formed();
  return s;
}

DistributionSpec DistributionSpec::constant(double value) {
  return discrete({Atom{value, 1.0}});
}

void DistributionSpec::check_well_formed() const {
  switch (kind) {
    case DistributionKind::kExponential:
      if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("exponential rate must be positive and finite");
      }
      return;
    case DistributionKind::kUniform:
      if (!(lower >= 0.0) || !(upper > lower) || !std::isfinite(upper)) {
        throw std::invalid_argument("uniform endpoints must satisfy 0 <= lower < upper < inf");
      }
      return;
    case DistributionKind::kGamma:
      if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) ||
          !std::isfinite(scale)) {
        throw std::invalid_argument("gamma shape and scale must be positive and finite");
      }
      return;
    case DistributionKind::kDiscrete: {
      if (atoms.empty()) throw std::invalid_argument("discrete law needs at least one atom");
      double total = 0.0;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        const Atom& a = atoms[i];
        if (!(a.value >= 0.0) || !std::isfinite(a.value)) {
          throw std::invalid_argument("discrete atom values must be finite and >= 0");
        }
        if (!(a.probability > 0.0)) {
          throw std::invalid_argument("discrete atom probabilities must be > 0");
        }
        if (i > 0 && !(atoms[i - 1].value < a.value)) {
          throw std::invalid_argument("discrete atoms must have distinct, sorted values");
        }
        total += a.probability;
      }
      if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("discrete probabilities sum to " +
                                    format_double(total) + ", not 1");
      }
      return;
    }
  }
}

double DistributionSpec::quantile(double u) const {
  switch (kind) {
    case DistributionKind::kExponential:
      return -std::log1p(-u) / rate;
    case DistributionKind::kUniform:
      return lower + (upper - lower) * u;
    case DistributionKind::kGamma:
      if (u <= 0.0) return 0.0;
      return scale * boost::math::gamma_p_inv(shape, u);
    case DistributionKind::kDiscrete: {
      double cum = 0.0;
      for (const Atom& a : atoms) {
        cum += a.probability;
        if (u < cum) return a.value;
      }
      return atoms.back().value;
    }
  }
  return 0.0;
}

double DistributionSpec::cdf(double x) const {
  if (x < 0.0) return 0.0;
  switch (kind) {
    case DistributionKind::kExponential:
      return -std::expm1(-rate * x);
    case DistributionKind::kUniform:
      return std::clamp((x - lower) / (upper - lower), 0.0, 1.0);
    case DistributionKind::kGamma:
      return boost::math::gamma_p(shape, x / scale);
    case DistributionKind::kDiscrete: {
      double cum = 0.0;
      for (const Atom& a : atoms) {
        if (a.value > x) break;
        cum += a.probability;
      }
      return std::min(cum, 1.0);
    }
  }
  return 0.0;
}

double DistributionSpec::mean() const {
  switch (kind) {
    case DistributionKind::kExponential: return 1.0 / rate;
    case DistributionKind::kUniform: return 0.5 * (lower + upper);
    case DistributionKind::kGamma: return shape * scale;
    case DistributionKind::kDiscrete: {
      double m = 0.0;
      for (const Atom& a : atoms) m += a.value * a.probability;
      return m;
    }
  }
  return 0.0;
}

double DistributionSpec::variance() const {
  switch (kind) {
    case DistributionKind::kExponential: return 1.0 / (rate * rate);
    case DistributionKind::kUniform: return (upper - lower) * (upper - lower) / 12.0;
    case DistributionKind::kGamma: return shape * scale * scale;
    case DistributionKind::kDiscrete: {
      const double m = mean();
      double v = 0.0;
      for (const Atom& a : atoms) v += a.probability * (a.value - m) * (a.value - m);
      return v;
    }
  }
  return 0.0;
}

double DistributionSpec::support_infimum() const {
  switch (kind) {
    case DistributionKind::kExponential: return 0.0;
    case DistributionKind::kUniform: return lower;
    case DistributionKind::kGamma: return 0.0;
    case DistributionKind::kDiscrete: return atoms.front().value;
  }
  return 0.0;
}

double DistributionSpec::atom_mass_at_infimum() const {
  return kind == DistributionKind::kDiscrete ? atoms.front().probability : 0.0;
}

bool DistributionSpec::is_point_mass() const {
  return kind == DistributionKind::kDiscrete && atoms.size() == 1;
}

double percolation_threshold_bound(int dim) {
  if (dim <= 2) return 0.5;
  return 1.0 / (2.0 * dim - 1.0);
}

ValidationResult validate_distribution(const DistributionSpec& spec, int dim) {
  spec.check_well_formed();
  if (dim < 2 || dim > kMaxDim) {
    throw std::invalid_argument("dimension must be in [2, " +
                                std::to_string(kMaxDim) + "]");
  }
  ValidationResult r;
  r.atom_mass = spec.atom_mass_at_infimum();
  r.threshold = 0.5;
  if (spec.is_point_mass()) {
    r.accepted = true;
    r.message = "ok";
    r.warnings.push_back("point-mass law: weights are deterministic");
    return r;
  }
  if (r.atom_mass >= 0.5) {
    r.accepted = false;
    r.message = "atom mass " + format_double(r.atom_mass) +
                " at the support infimum is not below the percolation threshold " +
                format_double(r.threshold);
    return r;
  }
  r.accepted = true;
  r.message = "ok";
  if (dim >= 3) {
    const double bound = percolation_threshold_bound(dim);
    if (r.atom_mass >= bound) {
      r.threshold = bound;
      r.warnings.push_back("atom mass " + format_double(r.atom_mass) +
                           " lies between the conservative bound " +
                           format_double(bound) + " and 1/2; p_c(" +
                           std::to_string(dim) + ") is not known exactly");
    }
  }
  return r;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_replica_seed(std::uint64_t master,
                                  std::string_view experiment_id,
                                  std::uint64_t replica_index) {
  const std::uint64_t f = fnv1a64(experiment_id);
  const std::uint64_t h = mix64(master ^ mix64(f));
  return mix64(h + mix64(replica_index + kGolden));
}

Environment::Environment(DistributionSpec spec, std::uint64_t seed, int dim)
    : spec_(std::move(spec)), seed_(seed), dim_(dim) {
  const ValidationResult v = validate_distribution(spec_, dim_);
  if (!v.accepted) throw DistributionRejected(v.message, v.atom_mass, v.threshold);
}

double Environment::uniform_at(const LatticePoint& base, int axis) const {
  std::uint64_t h = mix64(seed_ ^ (kGolden * static_cast<std::uint64_t>(axis + 1)));
  for (int j = 0; j < dim_; ++j) {
    h = mix64(h + kGolden + static_cast<std::uint32_t>(base[j]));
  }
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double Environment::weight_at(const LatticePoint& base, int axis) const {
  if (fixed_) {
    if (auto it = fixed_->find(EdgeId{base, axis}); it != fixed_->end()) {
      return it->second;
    }
  }
  return spec_.quantile(uniform_at(base, axis));
}

Environment Environment::with_fixed_weights(
    const std::vector<std::pair<EdgeId, double>>& fixed) const {
  auto table = fixed_ ? std::make_shared<FixedWeights>(*fixed_)
                      : std::make_shared<FixedWeights>();
  for (const auto& [edge, w] : fixed) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("fixed edge weights must be finite and >= 0");
    }
    if (edge.base.dim() != dim_) {
      throw std::invalid_argument("fixed edge dimension does not match");
    }
    (*table)[edge] = w;
  }
  Environment copy = *this;
  copy.fixed_ = std::move(table);
  return copy;
}

double Environment::edge_weight(const LatticePoint& a, const LatticePoint& b) const {
  return edge_weight(EdgeId::between(a, b));
}

}  // namespace fpplab
