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

// Lattice geometry on Z^d: points, edges, finite boxes and l-infinity
// cylinders around a segment.

#ifndef FPPLAB_LATTICE_H_
#define FPPLAB_LATTICE_H_

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace fpplab {

inline constexpr int kMaxDim = 4;

using RealVector = std::vector<double>;

class LatticePoint {
 public:
  LatticePoint() = default;
  LatticePoint(std::initializer_list<int> coords);
  explicit LatticePoint(std::span<const int> coords);

  static LatticePoint origin(int dim);
  static LatticePoint unit(int dim, int axis);

  int dim() const { return dim_; }
  int operator[](int axis) const { return coords_[axis]; }
  int& operator[](int axis) { return coords_[axis]; }

  LatticePoint operator+(const LatticePoint& other) const;
  LatticePoint operator-(const LatticePoint& other) const;
  LatticePoint operator*(int factor) const;

  // Lexicographic order over the active coordinates.
  friend std::strong_ordering operator<=>(const LatticePoint& a,
                                          const LatticePoint& b);
  friend bool operator==(const LatticePoint& a, const LatticePoint& b);

  std::int64_t l1_norm() const;
  RealVector to_real() const;
  std::string to_string() const;

 private:
  std::array<std::int32_t, kMaxDim> coords_{};
  int dim_ = 0;
};

// The vertex x' with x in x' + [0,1)^d.
LatticePoint floor_point(std::span<const double> x);

bool are_neighbors(const LatticePoint& a, const LatticePoint& b);

// Nearest-neighbour edge keyed by its lexicographically smaller endpoint.
struct EdgeId {
  LatticePoint base;
  int axis = 0;

  // Throws std::invalid_argument if a and b are not lattice neighbours.
  static EdgeId between(const LatticePoint& a, const LatticePoint& b);

  LatticePoint head() const { return base + LatticePoint::unit(base.dim(), axis); }
  friend bool operator==(const EdgeId&, const EdgeId&) = default;
};

// Axis-aligned box [lo, hi] of lattice points. Vertices are indexed in
// row-major order with axis 0 most significant, so index order coincides
// with lexicographic order of coordinates.
class BoxRegion {
 public:
  BoxRegion() = default;
  BoxRegion(LatticePoint lo, LatticePoint hi);

  static BoxRegion bounding(std::span<const LatticePoint> points);

  int dim() const { return lo_.dim(); }
  const LatticePoint& lo() const { return lo_; }
  const LatticePoint& hi() const { return hi_; }
  std::int64_t extent(int axis) const { return std::int64_t{hi_[axis]} - lo_[axis] + 1; }
  std::int64_t stride(int axis) const { return strides_[axis]; }
  std::size_t num_vertices() const { return num_vertices_; }

  bool contains(const LatticePoint& p) const;
  bool on_boundary(const LatticePoint& p) const;
  std::size_t index_of(const LatticePoint& p) const;
  LatticePoint point_at(std::size_t index) const;
  int coordinate(std::size_t index, int axis) const {
    return lo_[axis] + static_cast<int>((index / strides_[axis]) % extent(axis));
  }

  BoxRegion inflated(int margin) const;
  bool contains_box(const BoxRegion& other) const;

 private:
  LatticePoint lo_;
  LatticePoint hi_;
  std::array<std::int64_t, kMaxDim> strides_{};
  std::size_t num_vertices_ = 0;
};

// Points at l-infinity distance at most `radius` from the segment
// [origin, origin + length * direction].
class CylinderRegion {
 public:
  CylinderRegion(RealVector origin, RealVector direction, double length,
                 double radius);

  int dim() const { return static_cast<int>(origin_.size()); }
  const RealVector& origin() const { return origin_; }
  const RealVector& direction() const { return direction_; }
  double length() const { return length_; }
  double radius() const { return radius_; }

  double linf_distance(std::span<const double> p) const;
  bool contains(const LatticePoint& p) const;

  // Smallest lattice box holding every member point.
  BoxRegion bounding_box() const;

 private:
  RealVector origin_;
  RealVector direction_;
  double length_;
  double radius_;
};

double euclidean_distance_to_segment(std::span<const double> p,
                                     std::span<const double> a,
                                     std::span<const double> b);

double euclidean_norm(std::span<const double> v);

}  // namespace fpplab

#endif  // FPPLAB_LATTICE_H_
