#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "shellsep/vec3.hpp"

namespace shellsep {

/// KD-tree over an immutable set of 3D points. Read-only after construction;
/// safe for concurrent queries.
class SpatialIndex {
 public:
  explicit SpatialIndex(const std::vector<Vec3>& points) {
    if (points.empty()) throw std::invalid_argument("SpatialIndex: empty point set");
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), 0);
    pts_ = points;  // reordered in build for locality
    nodes_.reserve(points.size() / kLeafSize * 2 + 2);
    root_ = build(0, static_cast<int>(points.size()));
  }

  std::size_t size() const { return pts_.size(); }

  void radius_query(const Vec3& center, double radius, std::vector<int>& out) const {
    out.clear();
    if (radius < 0.0) return;
    radius_rec(root_, center, radius, radius * radius, out);
  }

  std::vector<int> radius_query(const Vec3& center, double radius) const {
    std::vector<int> out;
    radius_query(center, radius, out);
    return out;
  }

  /// Nearest point to `query`, optionally skipping one original index
  /// (used for nearest-neighbor statistics over the cloud itself).
  /// Returns (original index, distance).
  std::pair<int, double> nearest(const Vec3& query, int skip_index = -1) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    nearest_rec(root_, query, skip_index, best, best_d2);
    return {best, std::sqrt(best_d2)};
  }

 private:
  static constexpr int kLeafSize = 16;

  struct Node {
    int axis = -1;     // -1 for leaf
    double split = 0;  // coordinate of the split plane
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf point range
    bool is_leaf() const { return axis < 0; }
  };

  static double component(const Vec3& v, int axis) {
    return axis == 0 ? v.x : (axis == 1 ? v.y : v.z);
  }

  int build(int begin, int end) {
    Node node;
    if (end - begin <= kLeafSize) {
      node.begin = begin;
      node.end = end;
      nodes_.push_back(node);
      return static_cast<int>(nodes_.size()) - 1;
    }
    Vec3 lo = pts_[begin], hi = pts_[begin];
    for (int i = begin + 1; i < end; ++i) {
      lo.x = std::min(lo.x, pts_[i].x);
      lo.y = std::min(lo.y, pts_[i].y);
      lo.z = std::min(lo.z, pts_[i].z);
      hi.x = std::max(hi.x, pts_[i].x);
      hi.y = std::max(hi.y, pts_[i].y);
      hi.z = std::max(hi.z, pts_[i].z);
    }
    const Vec3 extent = hi - lo;
    int axis = 0;
    if (extent.y > extent.x) axis = 1;
    if (component(extent, 2) > component(extent, axis)) axis = 2;

    const int mid = (begin + end) / 2;
    // sort pts_ and order_ together around the median
    std::vector<int> perm(end - begin);
    std::iota(perm.begin(), perm.end(), begin);
    std::nth_element(perm.begin(), perm.begin() + (mid - begin), perm.end(),
                     [&](int a, int b) { return component(pts_[a], axis) < component(pts_[b], axis); });
    apply_perm(begin, perm);

    node.axis = axis;
    node.split = component(pts_[mid], axis);
    nodes_.push_back(node);
    const int self = static_cast<int>(nodes_.size()) - 1;
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes_[self].left = l;
    nodes_[self].right = r;
    return self;
  }

  void apply_perm(int begin, const std::vector<int>& perm) {
    std::vector<Vec3> tmp_p(perm.size());
    std::vector<int> tmp_o(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) {
      tmp_p[k] = pts_[perm[k]];
      tmp_o[k] = order_[perm[k]];
    }
    std::copy(tmp_p.begin(), tmp_p.end(), pts_.begin() + begin);
    std::copy(tmp_o.begin(), tmp_o.end(), order_.begin() + begin);
  }

  void radius_rec(int ni, const Vec3& c, double r, double r2, std::vector<int>& out) const {
    const Node& n = nodes_[ni];
    if (n.is_leaf()) {
      for (int i = n.begin; i < n.end; ++i) {
        if (distance2(pts_[i], c) <= r2) out.push_back(order_[i]);
      }
      return;
    }
    const double d = component(c, n.axis) - n.split;
    if (d <= r) radius_rec(n.left, c, r, r2, out);
    if (d >= -r) radius_rec(n.right, c, r, r2, out);
  }

  void nearest_rec(int ni, const Vec3& q, int skip, int& best, double& best_d2) const {
    const Node& n = nodes_[ni];
    if (n.is_leaf()) {
      for (int i = n.begin; i < n.end; ++i) {
        if (order_[i] == skip) continue;
        const double d2 = distance2(pts_[i], q);
        if (d2 < best_d2) {
          best_d2 = d2;
          best = order_[i];
        }
      }
      return;
    }
    const double d = component(q, n.axis) - n.split;
    const int near = d <= 0 ? n.left : n.right;
    const int far = d <= 0 ? n.right : n.left;
    nearest_rec(near, q, skip, best, best_d2);
    if (d * d < best_d2) nearest_rec(far, q, skip, best, best_d2);
  }

  std::vector<Vec3> pts_;
  std::vector<int> order_;  // original index of pts_[i]
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace shellsep
