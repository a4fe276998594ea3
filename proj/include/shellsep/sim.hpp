#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "shellsep/cloud.hpp"
#include "shellsep/collision.hpp"
#include "shellsep/config.hpp"
#include "shellsep/kdtree.hpp"
#include "shellsep/metrics.hpp"
#include "shellsep/rng.hpp"

namespace shellsep {

enum class BallStatus { Active, Escaped, StepLimit, CollisionLimit };
enum class TerminationReason { MaxBalls, DupStreak };

struct Contact {
  int index = -1;
  Vec3 position;
};

struct BallState {
  Vec3 position;
  Vec3 direction;  // unit
  int steps_taken = 0;
  int collisions = 0;
  Contact last_contacts[2];  // sliding window of the two most recent contacts
  int contact_count = 0;     // saturates at 2
  BallStatus status = BallStatus::Active;

  void record_contact(const Contact& c) {
    last_contacts[0] = last_contacts[1];
    last_contacts[1] = c;
    if (contact_count < 2) ++contact_count;
  }
};

struct SpawnPool {
  Vec3 initial;
  std::vector<Vec3> generated;
};

struct SeparationResult {
  std::vector<int> inter_indices;  // detected (collided) cloud indices, sorted
  long n_escape = 0;
  long n_nescap = 0;
  bool watertight = false;
  MetricTrace trace;
  long balls_run = 0;
  TerminationReason termination_reason = TerminationReason::MaxBalls;
  std::size_t spawn_points_generated = 0;
};

/// New ball at a pool spawn point (probability p0 picks a generated point
/// when any exist, otherwise the initial point) with a uniform random
/// direction.
inline BallState spawn_ball(const SpawnPool& pool, const SimConfig& cfg, Rng& rng) {
  BallState ball;
  ball.position = pool.initial;
  if (!pool.generated.empty() && uniform01(rng) < cfg.p_random_spawn) {
    const std::size_t k = static_cast<std::size_t>(
        std::uniform_int_distribution<std::size_t>(0, pool.generated.size() - 1)(rng));
    ball.position = pool.generated[k];
  }
  ball.direction = random_unit_vector(rng);
  return ball;
}

/// One simulation step: free move by L_max, or collide-and-reflect, then
/// escape/limit checks. Hits are appended to `hit_log` when given (probe
/// walks pass nullptr).
inline void step_ball(BallState& ball, const PointCloud& cloud, const SpatialIndex& index,
                      const EscapeBoundary& boundary, const DerivedScales& scales,
                      const SimConfig& cfg, Rng& rng, std::vector<int>* hit_log) {
  const CollisionQuery query{ball.position, ball.direction, scales.l_max, scales.r_eff};
  const auto hit = sweep_collide(query, cloud, index);
  if (hit) {
    ball.position = hit->contact;
    ball.direction =
        reflect(ball.direction, hit->contact, cloud.point(hit->point_index), rng, cfg.perturb_angle);
    ++ball.collisions;
    ++ball.steps_taken;
    ball.record_contact({hit->point_index, hit->contact});
    if (hit_log) hit_log->push_back(hit->point_index);
  } else {
    ball.position += ball.direction * scales.l_max;
    ++ball.steps_taken;
  }
  if (boundary.outside(ball.position)) {
    ball.status = BallStatus::Escaped;
  } else if (ball.collisions >= cfg.max_collisions_per_ball) {
    ball.status = BallStatus::CollisionLimit;
  } else if (ball.steps_taken >= cfg.max_steps_per_ball) {
    ball.status = BallStatus::StepLimit;
  }
}

/// Midpoint of the two most recent collision contacts, the candidate for a
/// new spawn point.
inline std::optional<Vec3> propose_spawn(const BallState& ball) {
  if (ball.contact_count < 2) return std::nullopt;
  return (ball.last_contacts[0].position + ball.last_contacts[1].position) * 0.5;
}

/// Candidate spawn point filter: capacity, on-surface proximity, pool
/// diversity, and a short probe walk that must not escape the boundary.
inline bool validate_spawn(const Vec3& candidate, const SpawnPool& pool, const PointCloud& cloud,
                           const SpatialIndex& index, const EscapeBoundary& boundary,
                           const DerivedScales& scales, const SimConfig& cfg, Rng& rng) {
  if (pool.generated.size() >= static_cast<std::size_t>(cfg.max_spawn_points)) return false;
  if (index.nearest(candidate).second < scales.spawn_nn_reject) return false;
  const double min_sep2 = scales.spawn_min_separation * scales.spawn_min_separation;
  if (distance2(candidate, pool.initial) < min_sep2) return false;
  for (const Vec3& p : pool.generated) {
    if (distance2(candidate, p) < min_sep2) return false;
  }
  // probe random walk: same kinematics, no logging, no step/collision limits
  BallState probe;
  probe.position = candidate;
  probe.direction = random_unit_vector(rng);
  for (int s = 0; s < cfg.probe_steps; ++s) {
    const CollisionQuery q{probe.position, probe.direction, scales.l_max, scales.r_eff};
    const auto hit = sweep_collide(q, cloud, index);
    if (hit) {
      probe.position = hit->contact;
      probe.direction = reflect(probe.direction, hit->contact, cloud.point(hit->point_index), rng,
                                cfg.perturb_angle);
    } else {
      probe.position += probe.direction * scales.l_max;
    }
    if (boundary.outside(probe.position)) return false;
  }
  return true;
}

namespace detail {

struct BallOutcome {
  long ball_index = 0;
  BallStatus status = BallStatus::Active;
  std::vector<int> hits;                  // collision order, may repeat
  std::vector<Vec3> candidate_spawns;     // passed validation against the snapshot pool
};

/// Runs one complete ball. The trajectory (and all RNG draws) depends only
/// on (seed, ball_index, snapshot pool), never on scheduling. Candidate
/// spawn points are validated against the snapshot plus this ball's own
/// accepted candidates; the coordinator re-checks capacity/proximity against
/// the merged pool.
inline BallOutcome run_one_ball(long ball_index, const PointCloud& cloud,
                                const SpatialIndex& index, const EscapeBoundary& boundary,
                                const SimConfig& cfg, const DerivedScales& scales,
                                const SpawnPool& snapshot) {
  Rng rng = make_ball_rng(cfg.seed, static_cast<std::uint64_t>(ball_index));
  BallOutcome out;
  out.ball_index = ball_index;
  BallState ball = spawn_ball(snapshot, cfg, rng);
  SpawnPool local = snapshot;  // extended with this ball's accepted candidates
  while (ball.status == BallStatus::Active) {
    const int collisions_before = ball.collisions;
    step_ball(ball, cloud, index, boundary, scales, cfg, rng, &out.hits);
    if (ball.collisions > collisions_before) {
      if (const auto cand = propose_spawn(ball)) {
        if (validate_spawn(*cand, local, cloud, index, boundary, scales, cfg, rng)) {
          local.generated.push_back(*cand);
          out.candidate_spawns.push_back(*cand);
        }
      }
    }
  }
  out.status = ball.status;
  return out;
}

}  // namespace detail

}  // namespace shellsep
