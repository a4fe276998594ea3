#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "shellsep/kdtree.hpp"
#include "shellsep/vec3.hpp"

namespace shellsep {

enum class Label : std::uint8_t { Inter = 0, Outer = 1, Unknown = 2 };

/// Mean nearest-neighbor distance over all points (the cloud unit length).
/// Requires at least two points.
inline double estimate_unit_length(const std::vector<Vec3>& points) {
  if (points.size() < 2) {
    throw std::invalid_argument("estimate_unit_length: need at least 2 points");
  }
  SpatialIndex index(points);
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sum += index.nearest(points[i], static_cast<int>(i)).second;
  }
  return sum / static_cast<double>(points.size());
}

/// Immutable point cloud with optional ground-truth layer labels and a
/// cached unit length r0. Indices are stable 0-based input-order positions.
class PointCloud {
 public:
  PointCloud(std::vector<Vec3> points, std::vector<Label> labels = {})
      : points_(std::move(points)), labels_(std::move(labels)) {
    if (points_.size() < 2) throw std::invalid_argument("PointCloud: need at least 2 points");
    if (!labels_.empty() && labels_.size() != points_.size()) {
      throw std::invalid_argument("PointCloud: label count does not match point count");
    }
    for (const Vec3& p : points_) {
      if (!p.finite()) throw std::invalid_argument("PointCloud: non-finite coordinate");
    }
    r0_ = estimate_unit_length(points_);
  }

  const std::vector<Vec3>& points() const { return points_; }
  const Vec3& point(int i) const { return points_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return points_.size(); }
  double r0() const { return r0_; }

  bool labeled() const { return !labels_.empty(); }
  const std::vector<Label>& labels() const { return labels_; }
  Label label(int i) const {
    return labels_.empty() ? Label::Unknown : labels_[static_cast<std::size_t>(i)];
  }
  std::size_t count_label(Label l) const {
    std::size_t n = 0;
    for (Label x : labels_) n += (x == l);
    return n;
  }

 private:
  std::vector<Vec3> points_;
  std::vector<Label> labels_;
  double r0_ = 0.0;
};

inline SpatialIndex build_index(const PointCloud& cloud) { return SpatialIndex(cloud.points()); }

/// Absorbing sphere enclosing the whole cloud; balls crossing it terminate.
struct EscapeBoundary {
  Vec3 center;
  double radius = 0.0;

  bool outside(const Vec3& p) const { return distance(p, center) > radius; }
};

/// Boundary centered at the axis-aligned bounding-box center, with radius
/// margin_factor times the farthest point distance from that center.
inline EscapeBoundary make_escape_boundary(const PointCloud& cloud, double margin_factor) {
  if (margin_factor < 1.0) {
    throw std::invalid_argument("make_escape_boundary: margin_factor must be >= 1");
  }
  Vec3 lo = cloud.points().front(), hi = lo;
  for (const Vec3& p : cloud.points()) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
    hi.z = std::max(hi.z, p.z);
  }
  const Vec3 center = (lo + hi) * 0.5;
  double max_d = 0.0;
  for (const Vec3& p : cloud.points()) max_d = std::max(max_d, distance(p, center));
  return {center, margin_factor * max_d};
}

inline Vec3 bounding_box_center(const PointCloud& cloud) {
  return make_escape_boundary(cloud, 1.0).center;
}

}  // namespace shellsep
