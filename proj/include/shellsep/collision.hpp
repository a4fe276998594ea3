#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "shellsep/cloud.hpp"
#include "shellsep/kdtree.hpp"
#include "shellsep/rng.hpp"
#include "shellsep/vec3.hpp"

namespace shellsep {

struct CollisionQuery {
  Vec3 origin;
  Vec3 direction;  // unit
  double max_dist = 0.0;
  double effective_radius = 0.0;
};

struct CollisionHit {
  int point_index = -1;
  double t = 0.0;  // travel distance to contact
  Vec3 contact;
};

namespace detail {

/// Tests one candidate point against the swept sphere and updates the best
/// hit. Contact condition: |origin + t*dir - q| = r_eff, i.e.
/// t^2 - 2 t (dir . (q - origin)) + |q - origin|^2 - r_eff^2 = 0.
/// A candidate already strictly inside r_eff of the origin is an immediate
/// contact at t = 1e-6 * r_eff (prevents tunneling after a reflection).
inline void consider_candidate(const CollisionQuery& q, const Vec3& p, int idx, bool& immediate,
                               double& best_t, double& best_key, int& best_idx) {
  const Vec3 w = p - q.origin;
  const double c = w.norm2() - q.effective_radius * q.effective_radius;
  if (c < 0.0) {
    // overlap start; rank by distance to origin, closest wins
    const double key = w.norm2();
    if (!immediate || key < best_key || (key == best_key && idx < best_idx)) {
      immediate = true;
      best_key = key;
      best_idx = idx;
      best_t = 1e-6 * q.effective_radius;
    }
    return;
  }
  if (immediate) return;
  const double b = q.direction.dot(w);
  double disc = b * b - c;
  if (disc < 0.0) {
    if (disc < -1e-12) return;
    disc = 0.0;  // clamp floating-point noise
  }
  const double t1 = b - std::sqrt(disc);
  if (t1 <= 0.0 || t1 > q.max_dist) return;
  if (best_idx < 0 || t1 < best_t || (t1 == best_t && idx < best_idx)) {
    best_t = t1;
    best_idx = idx;
  }
}

}  // namespace detail

/// Earliest swept-sphere contact along the ray, or nullopt when the ball can
/// move the full max_dist freely. Candidates are gathered from the spatial
/// index over the capsule of radius effective_radius around the travel
/// segment, covered by a sequence of query spheres marched front to back so
/// empty space is skipped cheaply.
inline std::optional<CollisionHit> sweep_collide(const CollisionQuery& query,
                                                 const PointCloud& cloud,
                                                 const SpatialIndex& index) {
  const double r_eff = query.effective_radius;
  const double l = query.max_dist;
  double seg = std::max(4.0 * r_eff, l / 32.0);
  seg = std::min(seg, l);

  bool immediate = false;
  double best_t = 0.0, best_key = 0.0;
  int best_idx = -1;

  std::vector<int> candidates;
  const double slack = 1e-9 * (1.0 + l + r_eff);
  for (double s0 = 0.0; s0 < l; s0 += seg) {
    const double s1 = std::min(s0 + seg, l);
    if (best_idx >= 0 && s0 > best_t) break;  // later segments only yield larger t
    const Vec3 mid = query.origin + query.direction * (0.5 * (s0 + s1));
    index.radius_query(mid, 0.5 * (s1 - s0) + r_eff + slack, candidates);
    for (int idx : candidates) {
      detail::consider_candidate(query, cloud.point(idx), idx, immediate, best_t, best_key,
                                 best_idx);
    }
    if (immediate) break;
  }
  if (best_idx < 0) return std::nullopt;
  return CollisionHit{best_idx, best_t, query.origin + query.direction * best_t};
}

/// Specular reflection off the swept-sphere contact with a bounded random
/// perturbation. The surface normal proxy is the contact-to-ball-center
/// direction, exact for sphere-vs-point contact and independent of any
/// estimated point normals.
inline Vec3 reflect(const Vec3& incoming, const Vec3& contact, const Vec3& surface_point,
                    Rng& rng, double max_perturb_angle) {
  const Vec3 n_raw = contact - surface_point;
  const double n_len = n_raw.norm();
  if (n_len < 1e-12) throw std::invalid_argument("reflect: degenerate contact normal");
  const Vec3 n = n_raw / n_len;
  const Vec3 specular = (incoming - 2.0 * incoming.dot(n) * n).normalized();
  if (max_perturb_angle <= 0.0) return specular;

  for (int attempt = 0; attempt < 16; ++attempt) {
    // random rotation axis orthogonal to the specular direction
    Vec3 axis;
    double axis_len = 0.0;
    do {
      const Vec3 u = random_unit_vector(rng);
      axis = u - specular * u.dot(specular);
      axis_len = axis.norm();
    } while (axis_len < 1e-9);
    axis = axis / axis_len;
    const double angle = uniform01(rng) * max_perturb_angle;
    // Rodrigues with axis orthogonal to the rotated vector
    const Vec3 rotated =
        (specular * std::cos(angle) + axis.cross(specular) * std::sin(angle)).normalized();
    if (rotated.dot(n) > 0.0) return rotated;
  }
  return specular;
}

}  // namespace shellsep
