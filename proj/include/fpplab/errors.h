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

#ifndef FPPLAB_ERRORS_H_
#define FPPLAB_ERRORS_H_

#include <stdexcept>
#include <string>

namespace fpplab {

// A weight law that fails the atom-at-infimum percolation condition.
class DistributionRejected : public std::invalid_argument {
 public:
  DistributionRejected(const std::string& what, double atom_mass,
                       double threshold)
      : std::invalid_argument(what),
        atom_mass_(atom_mass),
        threshold_(threshold) {}
  double atom_mass() const { return atom_mass_; }
  double threshold() const { return threshold_; }

 private:
  double atom_mass_;
  double threshold_;
};

// The statistic has no spread to fit (e.g. deterministic weights).
class DegenerateEstimate : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Too many samples were affected by box truncation.
class UnreliableEstimate : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Not enough usable records for the requested summary.
class InsufficientData : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A constrained shortest-path problem has no admissible path.
class Infeasible : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A configuration document that does not match the schema. `path` is a JSON
// pointer to the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::invalid_argument(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// An artifact directory whose run has not finished.
class IncompleteRun : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fpplab

#endif  // FPPLAB_ERRORS_H_
