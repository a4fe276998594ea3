#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <string>
#include <utility>
#include <thread>
#include <vector>

#include "shellsep/sim.hpp"

namespace shellsep {

namespace detail {

/// Shared driver for serial and parallel execution. Balls are scheduled in
/// rounds of up to workers * batch_size; all balls of a round see the spawn
/// pool snapshot taken at round start. Outcomes are merged in ball-index
/// order, so with workers = 1 and batch_size = 1 this is exactly the serial
/// algorithm.
inline SeparationResult run_core(const PointCloud& cloud, const SimConfig& cfg, int workers,
                                 int batch_size) {
  cfg.validate();
  const EscapeBoundary boundary = make_escape_boundary(cloud, cfg.escape_margin_factor);
  const Vec3 initial = cfg.spawn_point.value_or(boundary.center);
  if (!(distance(initial, boundary.center) < boundary.radius)) {
    throw std::invalid_argument("run_simulation: initial spawn point outside escape boundary");
  }
  const DerivedScales scales = DerivedScales::from(cfg, cloud.r0());
  const SpatialIndex index = build_index(cloud);

  CollisionLog log(cloud.size());
  SpawnPool pool{initial, {}};
  const PointCloud* labeled = cloud.labeled() ? &cloud : nullptr;
  const std::size_t n_inter = labeled ? cloud.count_label(Label::Inter) : 0;
  const std::size_t n_outer = labeled ? cloud.count_label(Label::Outer) : 0;

  SeparationResult result;
  result.termination_reason = TerminationReason::MaxBalls;
  long scheduled = 0;
  int streak = 0;
  // sliding window of (dup, collide) over recent balls for the termination
  // duplication rate
  std::deque<std::pair<long, long>> dup_win;
  long win_dup = 0, win_collide = 0;
  bool done = false;
  const double min_sep2 = scales.spawn_min_separation * scales.spawn_min_separation;

  std::vector<detail::BallOutcome> outcomes;
  while (!done && scheduled < cfg.max_balls) {
    const long round =
        std::min<long>(static_cast<long>(workers) * batch_size, cfg.max_balls - scheduled);
    outcomes.assign(static_cast<std::size_t>(round), {});
    const SpawnPool snapshot = pool;

    auto run_range = [&](long begin, long end) {
      for (long k = begin; k < end; ++k) {
        outcomes[static_cast<std::size_t>(k)] =
            detail::run_one_ball(scheduled + k, cloud, index, boundary, cfg, scales, snapshot);
      }
    };
    if (workers <= 1 || round == 1) {
      run_range(0, round);
    } else {
      const long chunk = (round + workers - 1) / workers;
      std::vector<std::thread> threads;
      for (long b = 0; b < round; b += chunk) {
        threads.emplace_back(run_range, b, std::min(b + chunk, round));
      }
      for (auto& t : threads) t.join();
    }
    scheduled += round;

    // ordered merge
    for (const auto& out : outcomes) {
      const auto& entry = log.add_ball(out.hits, out.status == BallStatus::Escaped, labeled);
      ++result.balls_run;
      if (out.status == BallStatus::Escaped) ++result.n_escape;
      else ++result.n_nescap;

      TraceRow row;
      row.i = result.balls_run;
      row.collide = entry.collide;
      row.new_count = entry.new_count;
      row.dup = entry.dup;
      if (entry.collide > 0) {
        row.r_dup = static_cast<double>(entry.dup) / entry.collide;
      }
      dup_win.push_back({entry.dup, entry.collide});
      win_dup += entry.dup;
      win_collide += entry.collide;
      if (dup_win.size() > static_cast<std::size_t>(cfg.dup_window)) {
        win_dup -= dup_win.front().first;
        win_collide -= dup_win.front().second;
        dup_win.pop_front();
      }
      const bool window_full =
          dup_win.size() == static_cast<std::size_t>(cfg.dup_window) && win_collide > 0;
      if (window_full &&
          static_cast<double>(win_dup) >= cfg.dup_threshold * static_cast<double>(win_collide)) {
        ++streak;
      } else {
        streak = 0;
      }
      row.c_inter = static_cast<long>(log.c_inter());
      row.c_outer = static_cast<long>(log.c_outer());
      row.r_inter = n_inter ? static_cast<double>(log.c_inter()) / n_inter : 0.0;
      row.r_outer = n_outer ? static_cast<double>(log.c_outer()) / n_outer : 0.0;
      row.n_escape = result.n_escape;
      result.trace.push_back(row);

      for (const Vec3& cand : out.candidate_spawns) {
        if (pool.generated.size() >= static_cast<std::size_t>(cfg.max_spawn_points)) break;
        bool ok = distance2(cand, pool.initial) >= min_sep2;
        for (const Vec3& p : pool.generated) {
          if (!ok) break;
          ok = distance2(cand, p) >= min_sep2;
        }
        if (ok) pool.generated.push_back(cand);
      }

      if (streak >= cfg.dup_streak) {
        result.termination_reason = TerminationReason::DupStreak;
        done = true;
        break;  // remaining outcomes of this round are discarded
      }
    }
  }

  result.inter_indices = log.global_visited();
  result.watertight = classify_watertight(result.n_escape, cfg.escape_watertight_threshold);
  result.spawn_points_generated = pool.generated.size();
  return result;
}

}  // namespace detail

inline SeparationResult run_simulation(const PointCloud& cloud, const SimConfig& cfg) {
  return detail::run_core(cloud, cfg, 1, 1);
}

inline SeparationResult run_parallel(const PointCloud& cloud, const ParallelConfig& cfg) {
  cfg.validate();
  return detail::run_core(cloud, cfg.sim, cfg.workers, cfg.batch_size);
}

struct BenchReport {
  std::string implementation;  // "serial" or "parallel"
  int workers = 1;
  double elapsed_seconds = 0.0;
  double balls_per_second = 0.0;
  long balls_run = 0;
  double r_inter = 0.0;
  double r_outer = 0.0;
  long n_escape = 0;
};

/// Runs the scaling study: one serial run, then run_parallel per worker
/// count, all with the same seed and budget.
inline std::vector<BenchReport> benchmark(const PointCloud& cloud,
                                          const std::vector<int>& worker_counts,
                                          const ParallelConfig& base, bool include_serial = true) {
  std::vector<BenchReport> reports;
  auto measure = [&](const std::string& impl, int workers) {
    ParallelConfig cfg = base;
    cfg.workers = workers;
    if (impl == "serial") {
      cfg.workers = 1;
      cfg.batch_size = 1;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const SeparationResult res = run_parallel(cloud, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    BenchReport r;
    r.implementation = impl;
    r.workers = workers;
    r.elapsed_seconds = std::chrono::duration<double>(t1 - t0).count();
    r.balls_run = res.balls_run;
    r.balls_per_second = res.balls_run / std::max(r.elapsed_seconds, 1e-12);
    if (cloud.labeled()) {
      const double n_inter = static_cast<double>(cloud.count_label(Label::Inter));
      const double n_outer = static_cast<double>(cloud.count_label(Label::Outer));
      long c_inter = 0, c_outer = 0;
      if (!res.trace.empty()) {
        c_inter = res.trace.back().c_inter;
        c_outer = res.trace.back().c_outer;
      }
      r.r_inter = n_inter > 0 ? c_inter / n_inter : 0.0;
      r.r_outer = n_outer > 0 ? c_outer / n_outer : 0.0;
    }
    r.n_escape = res.n_escape;
    reports.push_back(r);
  };
  if (include_serial) measure("serial", 1);
  for (int w : worker_counts) measure("parallel", w);
  return reports;
}

}  // namespace shellsep
