#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "shellsep/cloud.hpp"
#include "shellsep/rng.hpp"

namespace shellsep {

/// Labeled double-layer sphere: the TSDF double-surface artifact in its
/// simplest form. Holes are spherical-cap openings cut from a shell.
struct DoubleSphereSpec {
  double inner_radius = 1.0;
  double outer_radius = 1.2;
  int n_inner = 20000;
  int n_outer = 20000;
  struct Hole {
    Vec3 direction;          // unit, cap center seen from the sphere center
    double angular_radius = 0.25;  // radians
    bool on_outer = false;
  };
  std::vector<Hole> holes;
  std::uint64_t seed = 0;
};

inline PointCloud generate_double_sphere(const DoubleSphereSpec& spec) {
  if (!(spec.inner_radius > 0.0 && spec.inner_radius < spec.outer_radius)) {
    throw std::invalid_argument("generate_double_sphere: need 0 < inner_radius < outer_radius");
  }
  if (spec.n_inner < 1 || spec.n_outer < 1) {
    throw std::invalid_argument("generate_double_sphere: point counts must be >= 1");
  }
  for (const auto& h : spec.holes) {
    if (!(h.angular_radius > 0.0 && h.angular_radius < 1.5707963267948966)) {
      throw std::invalid_argument("generate_double_sphere: hole angular_radius out of (0, pi/2)");
    }
  }
  Rng rng = make_ball_rng(spec.seed, 0x5f3759df);
  std::vector<Vec3> points;
  std::vector<Label> labels;
  points.reserve(static_cast<std::size_t>(spec.n_inner + spec.n_outer));
  labels.reserve(points.capacity());

  auto emit_shell = [&](int n, double radius, Label label, bool outer_shell) {
    for (int k = 0; k < n; ++k) {
      const Vec3 dir = random_unit_vector(rng);
      bool in_hole = false;
      for (const auto& h : spec.holes) {
        if (h.on_outer != outer_shell) continue;
        if (dir.dot(h.direction.normalized()) > std::cos(h.angular_radius)) {
          in_hole = true;
          break;
        }
      }
      if (in_hole) continue;
      points.push_back(dir * radius);
      labels.push_back(label);
    }
  };
  emit_shell(spec.n_inner, spec.inner_radius, Label::Inter, false);
  emit_shell(spec.n_outer, spec.outer_radius, Label::Outer, true);
  return PointCloud(std::move(points), std::move(labels));
}

/// Default open-boundary fixture: three random cap openings on the inner
/// shell.
inline DoubleSphereSpec open_double_sphere_spec(std::uint64_t seed = 0, int n_holes = 1,
                                                double angular_radius = 0.25) {
  DoubleSphereSpec spec;
  spec.seed = seed;
  Rng rng = make_ball_rng(seed, 0x9e3779b9);
  for (int k = 0; k < n_holes; ++k) {
    // a real scan opening pierces both layers; the phantom outer layer
    // recedes around the opening, so its cap is wider
    const Vec3 dir = random_unit_vector(rng);
    spec.holes.push_back({dir, angular_radius, false});
    spec.holes.push_back({dir, 1.4 * angular_radius, true});
  }
  return spec;
}

/// Double-walled axis-aligned box, the sharp-corner stress fixture. Each
/// shell gets its 8 corner points first, then uniform face samples up to
/// n_points per shell.
inline PointCloud generate_sharp_corner_box(double edge, double wall_gap, int n_points,
                                            std::uint64_t seed) {
  if (!(edge > 0.0) || !(wall_gap > 0.0)) {
    throw std::invalid_argument("generate_sharp_corner_box: edge and wall_gap must be > 0");
  }
  if (n_points < 8) {
    throw std::invalid_argument("generate_sharp_corner_box: need at least 8 points per shell");
  }
  Rng rng = make_ball_rng(seed, 0x2545f491);
  std::vector<Vec3> points;
  std::vector<Label> labels;
  points.reserve(static_cast<std::size_t>(2 * n_points));
  labels.reserve(points.capacity());

  auto emit_box = [&](double half, Label label) {
    for (int sx = -1; sx <= 1; sx += 2)
      for (int sy = -1; sy <= 1; sy += 2)
        for (int sz = -1; sz <= 1; sz += 2) {
          points.push_back({sx * half, sy * half, sz * half});
          labels.push_back(label);
        }
    for (int k = 8; k < n_points; ++k) {
      const int face = std::uniform_int_distribution<int>(0, 5)(rng);
      const double u = std::uniform_real_distribution<double>(-half, half)(rng);
      const double v = std::uniform_real_distribution<double>(-half, half)(rng);
      const double w = (face % 2 == 0) ? half : -half;
      Vec3 p;
      switch (face / 2) {
        case 0: p = {w, u, v}; break;
        case 1: p = {u, w, v}; break;
        default: p = {u, v, w}; break;
      }
      points.push_back(p);
      labels.push_back(label);
    }
  };
  emit_box(edge / 2.0, Label::Inter);
  emit_box(edge / 2.0 + wall_gap, Label::Outer);
  return PointCloud(std::move(points), std::move(labels));
}

}  // namespace shellsep
