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

// JSON forms of the library types. Non-finite numbers are written as null and
// read back as NaN. Seeds travel as decimal strings so 64-bit values survive
// readers that parse numbers as doubles.

#ifndef FPPLAB_SERIALIZE_H_
#define FPPLAB_SERIALIZE_H_

#include <cstdint>
#include <string>

#include <json.hpp>

#include "fpplab/cylinder.h"
#include "fpplab/environment.h"
#include "fpplab/exponents.h"
#include "fpplab/geodesic.h"
#include "fpplab/lattice.h"
#include "fpplab/sampling.h"
#include "fpplab/shape.h"

namespace fpplab {

using Json = nlohmann::json;

std::string seed_to_string(std::uint64_t seed);
// Accepts a decimal string or a non-negative integer.
std::uint64_t seed_from_json(const Json& j);

// null -> NaN.
double number_from_json(const Json& j);

void to_json(Json& j, const LatticePoint& p);
void from_json(const Json& j, LatticePoint& p);

// {"kind": ..., "params": {...}}.
void to_json(Json& j, const DistributionSpec& spec);
void from_json(const Json& j, DistributionSpec& spec);

// {"time", "vertices", "flags": {"touched_boundary", "feasible"}}.
void to_json(Json& j, const PathResult& path);
void from_json(const Json& j, PathResult& path);

void to_json(Json& j, const GeodesicSample& s);
void from_json(const Json& j, GeodesicSample& s);

void to_json(Json& j, const CylinderReplicaRecord& r);
void from_json(const Json& j, CylinderReplicaRecord& r);

void to_json(Json& j, const CurvatureEstimate& c);
void from_json(const Json& j, CurvatureEstimate& c);

void to_json(Json& j, const ExponentEstimate& e);
void to_json(Json& j, const KpzReport& r);
void to_json(Json& j, const TimeConstantEstimate& e);
void to_json(Json& j, const Measured& m);
void to_json(Json& j, const PerturbationCheck& c);
void to_json(Json& j, const VarianceBoundsReport& r);
void to_json(Json& j, const ScalingTable& t);

}  // namespace fpplab

#endif  // FPPLAB_SERIALIZE_H_
