#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "shellsep/vec3.hpp"

namespace shellsep {

/// All tunable simulation parameters. Size parameters are factors of the
/// cloud unit length r0 (or of R_ball / R_eff where noted) so one config
/// works across cloud scales.
struct SimConfig {
  double r_ball_factor = 2.0;             // R_ball = factor * r0
  double collision_margin_factor = 0.5;   // margin = factor * R_ball
  double l_max_factor = 50.0;             // L_max = factor * r0
  double p_random_spawn = 0.999;          // p0: pick a generated spawn point
  int max_steps_per_ball = 50;
  int max_collisions_per_ball = 5;
  long max_balls = 500000;
  double dup_threshold = 0.99;
  int dup_streak = 10;
  // The termination duplication rate is sum(dup)/sum(collide) over the most
  // recent dup_window balls; per-ball rates (<= max_collisions samples) are
  // far too noisy to gate termination on.
  int dup_window = 1000;
  int max_spawn_points = 200;
  double spawn_min_separation_factor = 2.0;  // * R_ball
  int probe_steps = 10;
  double spawn_nn_reject_factor = 1.0;  // * R_eff
  double escape_margin_factor = 1.2;
  double perturb_angle = 0.2617993877991494;  // radians (15 deg)
  std::uint64_t seed = 0;
  int escape_watertight_threshold = 5;
  std::optional<Vec3> spawn_point;  // default: bounding-box center

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw std::invalid_argument(std::string("SimConfig: ") + name + " must be > 0");
    };
    positive(r_ball_factor, "r_ball_factor");
    positive(collision_margin_factor, "collision_margin_factor");
    positive(l_max_factor, "l_max_factor");
    positive(spawn_min_separation_factor, "spawn_min_separation_factor");
    positive(spawn_nn_reject_factor, "spawn_nn_reject_factor");
    if (!(p_random_spawn >= 0.0 && p_random_spawn <= 1.0)) {
      throw std::invalid_argument("SimConfig: p_random_spawn must be in [0,1]");
    }
    if (!(dup_threshold > 0.0 && dup_threshold <= 1.0)) {
      throw std::invalid_argument("SimConfig: dup_threshold must be in (0,1]");
    }
    if (max_steps_per_ball < 1 || max_collisions_per_ball < 1 || max_balls < 1 ||
        dup_streak < 1 || dup_window < 1 || max_spawn_points < 1 || probe_steps < 1) {
      throw std::invalid_argument("SimConfig: integer limits must be >= 1");
    }
    if (!(escape_margin_factor >= 1.0)) {
      throw std::invalid_argument("SimConfig: escape_margin_factor must be >= 1");
    }
    if (perturb_angle < 0.0) {
      throw std::invalid_argument("SimConfig: perturb_angle must be >= 0");
    }
    if (escape_watertight_threshold < 0) {
      throw std::invalid_argument("SimConfig: escape_watertight_threshold must be >= 0");
    }
  }
};

/// Absolute lengths derived from the config and the cloud unit length.
struct DerivedScales {
  double r_ball = 0.0;
  double collision_margin = 0.0;
  double r_eff = 0.0;
  double l_max = 0.0;
  double spawn_min_separation = 0.0;
  double spawn_nn_reject = 0.0;

  static DerivedScales from(const SimConfig& cfg, double r0) {
    DerivedScales d;
    d.r_ball = cfg.r_ball_factor * r0;
    d.collision_margin = cfg.collision_margin_factor * d.r_ball;
    d.r_eff = d.r_ball + d.collision_margin;
    d.l_max = cfg.l_max_factor * r0;
    d.spawn_min_separation = cfg.spawn_min_separation_factor * d.r_ball;
    d.spawn_nn_reject = cfg.spawn_nn_reject_factor * d.r_eff;
    return d;
  }
};

struct ParallelConfig {
  int workers = 1;
  int batch_size = 64;
  SimConfig sim;

  void validate() const {
    if (workers < 1) throw std::invalid_argument("ParallelConfig: workers must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("ParallelConfig: batch_size must be >= 1");
    sim.validate();
  }
};

}  // namespace shellsep
