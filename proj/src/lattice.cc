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

#include "fpplab/lattice.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace fpplab {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("lattice dimension must be in [1, " +
                                std::to_string(kMaxDim) + "], got " +
                                std::to_string(dim));
  }
}

}  // namespace

LatticePoint::LatticePoint(std::initializer_list<int> coords)
    : LatticePoint(std::span<const int>(coords.begin(), coords.size())) {}

LatticePoint::LatticePoint(std::span<const int> coords)
    : dim_(static_cast<int>(coords.size())) {
  check_dim(dim_);
  std::copy(coords.begin(), coords.end(), coords_.begin());
}

LatticePoint LatticePoint::origin(int dim) {
  check_dim(dim);
  LatticePoint p;
  p.dim_ = dim;
  return p;
}

LatticePoint LatticePoint::unit(int dim, int axis) {
  LatticePoint p = origin(dim);
  p.coords_[axis] = 1;
  return p;
}

LatticePoint LatticePoint::operator+(const LatticePoint& other) const {
  LatticePoint r = *this;
  for (int i = 0; i < dim_; ++i) r.coords_[i] += other.coords_[i];
  return r;
}

LatticePoint LatticePoint::operator-(const LatticePoint& other) const {
  LatticePoint r = *this;
  for (int i = 0; i < dim_; ++i) r.coords_[i] -= other.coords_[i];
  return r;
}

LatticePoint LatticePoint::operator*(int factor) const {
  LatticePoint r = *this;
  for (int i = 0; i < dim_; ++i) r.coords_[i] *= factor;
  return r;
}

std::strong_ordering operator<=>(const LatticePoint& a, const LatticePoint& b) {
  if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
  for (int i = 0; i < a.dim_; ++i) {
    if (auto c = a.coords_[i] <=> b.coords_[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

bool operator==(const LatticePoint& a, const LatticePoint& b) {
  return (a <=> b) == 0;
}

std::int64_t LatticePoint::l1_norm() const {
  std::int64_t s = 0;
  for (int i = 0; i < dim_; ++i) s += std::llabs(coords_[i]);
  return s;
}

RealVector LatticePoint::to_real() const {
  return RealVector(coords_.begin(), coords_.begin() + dim_);
}

std::string LatticePoint::to_string() const {
  std::string s = "(";
  for (int i = 0; i < dim_; ++i) {
    if (i) s += ",";
    s += std::to_string(coords_[i]);
  }
  return s + ")";
}

LatticePoint floor_point(std::span<const double> x) {
  check_dim(static_cast<int>(x.size()));
  LatticePoint p = LatticePoint::origin(static_cast<int>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[static_cast<int>(i)] = static_cast<int>(std::floor(x[i]));
  }
  return p;
}

bool are_neighbors(const LatticePoint& a, const LatticePoint& b) {
  if (a.dim() != b.dim()) return false;
  return (a - b).l1_norm() == 1;
}

EdgeId EdgeId::between(const LatticePoint& a, const LatticePoint& b) {
  if (!are_neighbors(a, b)) {
    throw std::invalid_argument("not lattice neighbours: " + a.to_string() +
                                " " + b.to_string());
  }
  const LatticePoint& lo = (a < b) ? a : b;
  const LatticePoint& hi = (a < b) ? b : a;
  for (int i = 0; i < a.dim(); ++i) {
    if (lo[i] != hi[i]) return EdgeId{lo, i};
  }
  throw std::logic_error("unreachable");
}

BoxRegion::BoxRegion(LatticePoint lo, LatticePoint hi)
    : lo_(lo), hi_(hi) {
  if (lo.dim() != hi.dim()) {
    throw std::invalid_argument("box corners differ in dimension");
  }
  check_dim(lo.dim());
  std::size_t total = 1;
  for (int i = lo.dim() - 1; i >= 0; --i) {
    if (lo[i] > hi[i]) {
      throw std::invalid_argument("box corners not ordered: " +
                                  lo.to_string() + " " + hi.to_string());
    }
    strides_[i] = static_cast<std::int64_t>(total);
    total *= static_cast<std::size_t>(extent(i));
  }
  num_vertices_ = total;
}

BoxRegion BoxRegion::bounding(std::span<const LatticePoint> points) {
  if (points.empty()) throw std::invalid_argument("no points to bound");
  LatticePoint lo = points.front();
  LatticePoint hi = points.front();
  for (const LatticePoint& p : points) {
    for (int i = 0; i < p.dim(); ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  }
  return BoxRegion(lo, hi);
}

bool BoxRegion::contains(const LatticePoint& p) const {
  if (p.dim() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (p[i] < lo_[i] || p[i] > hi_[i]) return false;
  }
  return true;
}

bool BoxRegion::on_boundary(const LatticePoint& p) const {
  for (int i = 0; i < dim(); ++i) {
    if (p[i] == lo_[i] || p[i] == hi_[i]) return true;
  }
  return false;
}

std::size_t BoxRegion::index_of(const LatticePoint& p) const {
  std::size_t idx = 0;
  for (int i = 0; i < dim(); ++i) {
    idx += static_cast<std::size_t>(p[i] - lo_[i]) *
           static_cast<std::size_t>(strides_[i]);
  }
  return idx;
}

LatticePoint BoxRegion::point_at(std::size_t index) const {
  LatticePoint p = LatticePoint::origin(dim());
  for (int i = 0; i < dim(); ++i) p[i] = coordinate(index, i);
  return p;
}

BoxRegion BoxRegion::inflated(int margin) const {
  LatticePoint lo = lo_;
  LatticePoint hi = hi_;
  for (int i = 0; i < dim(); ++i) {
    lo[i] -= margin;
    hi[i] += margin;
  }
  return BoxRegion(lo, hi);
}

bool BoxRegion::contains_box(const BoxRegion& other) const {
  return contains(other.lo_) && contains(other.hi_);
}

CylinderRegion::CylinderRegion(RealVector origin, RealVector direction,
                               double length, double radius)
    : origin_(std::move(origin)),
      direction_(std::move(direction)),
      length_(length),
      radius_(radius) {
  check_dim(dim());
  if (direction_.size() != origin_.size()) {
    throw std::invalid_argument("cylinder origin/direction dimension mismatch");
  }
  if (std::abs(euclidean_norm(direction_) - 1.0) > 1e-12) {
    throw std::invalid_argument("cylinder direction must have unit length");
  }
  if (!(length_ >= 0.0) || !(radius_ >= 0.0)) {
    throw std::invalid_argument("cylinder length and radius must be >= 0");
  }
}

// max_j |w_j - t s_j| is convex and piecewise linear in t, so its minimum over
// [0, 1] sits at an endpoint or at a crossing of two of the 2d linear pieces.
double CylinderRegion::linf_distance(std::span<const double> p) const {
  const int d = dim();
  std::array<double, kMaxDim> w{};
  std::array<double, kMaxDim> s{};
  for (int j = 0; j < d; ++j) {
    w[j] = p[j] - origin_[j];
    s[j] = length_ * direction_[j];
  }
  auto eval = [&](double t) {
    double m = 0.0;
    for (int j = 0; j < d; ++j) m = std::max(m, std::abs(w[j] - t * s[j]));
    return m;
  };
  double best = std::min(eval(0.0), eval(1.0));
  auto try_t = [&](double t) {
    if (t > 0.0 && t < 1.0) best = std::min(best, eval(t));
  };
  for (int j = 0; j < d; ++j) {
    if (s[j] != 0.0) try_t(w[j] / s[j]);
    for (int k = j + 1; k < d; ++k) {
      if (s[j] != s[k]) try_t((w[j] - w[k]) / (s[j] - s[k]));
      if (s[j] != -s[k]) try_t((w[j] + w[k]) / (s[j] + s[k]));
    }
  }
  return best;
}

bool CylinderRegion::contains(const LatticePoint& p) const {
  const RealVector x = p.to_real();
  return linf_distance(x) <= radius_ + 1e-9;
}

BoxRegion CylinderRegion::bounding_box() const {
  const int d = dim();
  LatticePoint lo = LatticePoint::origin(d);
  LatticePoint hi = LatticePoint::origin(d);
  for (int j = 0; j < d; ++j) {
    const double a = origin_[j];
    const double b = origin_[j] + length_ * direction_[j];
    lo[j] = static_cast<int>(std::ceil(std::min(a, b) - radius_ - 1e-9));
    hi[j] = static_cast<int>(std::floor(std::max(a, b) + radius_ + 1e-9));
  }
  return BoxRegion(lo, hi);
}

double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double euclidean_distance_to_segment(std::span<const double> p,
                                     std::span<const double> a,
                                     std::span<const double> b) {
  const std::size_t d = p.size();
  double ab2 = 0.0;
  double dot = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    ab2 += (b[j] - a[j]) * (b[j] - a[j]);
    dot += (p[j] - a[j]) * (b[j] - a[j]);
  }
  const double t = ab2 > 0.0 ? std::clamp(dot / ab2, 0.0, 1.0) : 0.0;
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double r = p[j] - (a[j] + t * (b[j] - a[j]));
    s += r * r;
  }
  return std::sqrt(s);
}

}  // namespace fpplab
