#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "shellsep/cloud.hpp"

namespace shellsep {

/// Collision bookkeeping across all simulation balls. Single writer (the
/// simulation driver); all metric computations are pure reads.
class CollisionLog {
 public:
  struct BallEntry {
    std::vector<int> hits;  // raw hit sequence, may repeat indices
    int collide = 0;        // unique indices hit by this ball
    int new_count = 0;      // unique indices not in global_visited before this ball
    int dup = 0;            // collide - new_count
    bool escaped = false;
  };

  explicit CollisionLog(std::size_t n_points) : visited_mask_(n_points, 0) {}

  /// Appends one completed ball. `hits` is the raw hit sequence in collision
  /// order. Returns the entry with unique/new/dup counts filled in.
  const BallEntry& add_ball(std::vector<int> hits, bool escaped, const PointCloud* labeled) {
    BallEntry e;
    e.hits = std::move(hits);
    e.escaped = escaped;
    std::vector<int> uniq = e.hits;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    e.collide = static_cast<int>(uniq.size());
    for (int idx : uniq) {
      if (visited_mask_[static_cast<std::size_t>(idx)]) {
        ++e.dup;
      } else {
        visited_mask_[static_cast<std::size_t>(idx)] = 1;
        ++e.new_count;
        ++visited_count_;
        if (labeled && labeled->labeled()) {
          const Label l = labeled->label(idx);
          if (l == Label::Inter) ++c_inter_;
          else if (l == Label::Outer) ++c_outer_;
        }
      }
    }
    per_ball_.push_back(std::move(e));
    return per_ball_.back();
  }

  std::size_t balls() const { return per_ball_.size(); }
  const std::vector<BallEntry>& per_ball() const { return per_ball_; }
  const BallEntry& ball(std::size_t i) const { return per_ball_[i]; }

  bool visited(int idx) const { return visited_mask_[static_cast<std::size_t>(idx)] != 0; }
  std::size_t visited_count() const { return visited_count_; }
  std::size_t c_inter() const { return c_inter_; }
  std::size_t c_outer() const { return c_outer_; }

  std::vector<int> global_visited() const {
    std::vector<int> out;
    out.reserve(visited_count_);
    for (std::size_t i = 0; i < visited_mask_.size(); ++i) {
      if (visited_mask_[i]) out.push_back(static_cast<int>(i));
    }
    return out;
  }

 private:
  std::vector<BallEntry> per_ball_;
  std::vector<std::uint8_t> visited_mask_;
  std::size_t visited_count_ = 0;
  std::size_t c_inter_ = 0;
  std::size_t c_outer_ = 0;
};

/// R_dup(i) = |Dup(i)| / |Collide(i)| over unique indices, evaluated against
/// the global visited set before ball i. Undefined (nullopt) when the ball
/// collided with nothing.
inline std::optional<double> duplication_rate(const CollisionLog& log, std::size_t i) {
  const auto& e = log.ball(i);
  if (e.collide == 0) return std::nullopt;
  return static_cast<double>(e.dup) / static_cast<double>(e.collide);
}

/// (R_inter, R_outer) = visited fraction of ground-truth Inter / Outer points.
inline std::pair<double, double> detection_rates(const CollisionLog& log,
                                                 const PointCloud& cloud) {
  if (!cloud.labeled()) throw std::invalid_argument("detection_rates: cloud has no labels");
  std::size_t n_inter = 0, n_outer = 0, c_inter = 0, c_outer = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Label l = cloud.label(static_cast<int>(i));
    if (l == Label::Inter) {
      ++n_inter;
      if (log.visited(static_cast<int>(i))) ++c_inter;
    } else if (l == Label::Outer) {
      ++n_outer;
      if (log.visited(static_cast<int>(i))) ++c_outer;
    }
  }
  const double r_inter = n_inter ? static_cast<double>(c_inter) / n_inter : 0.0;
  const double r_outer = n_outer ? static_cast<double>(c_outer) / n_outer : 0.0;
  return {r_inter, r_outer};
}

inline bool classify_watertight(long n_escape, int threshold) { return n_escape <= threshold; }

struct TraceRow {
  long i = 0;  // 1-based completed-ball index
  int collide = 0;
  int new_count = 0;
  int dup = 0;
  double r_dup = std::numeric_limits<double>::quiet_NaN();  // NaN when undefined
  long c_inter = 0;                                         // cumulative
  long c_outer = 0;
  double r_inter = 0.0;
  double r_outer = 0.0;
  long n_escape = 0;  // cumulative
};

using MetricTrace = std::vector<TraceRow>;

struct SaturationFit {
  double a0 = 0.0;
  double tau = 0.0;
  double residual_rms = 0.0;
};

namespace detail {

inline double saturation_sse(const std::vector<std::pair<double, double>>& s, double a,
                             double tau) {
  double sse = 0.0;
  for (const auto& [i, r] : s) {
    const double e = a * (1.0 - std::exp(-i / tau)) - r;
    sse += e * e;
  }
  return sse;
}

}  // namespace detail

/// Least-squares fit of r(i) = A0 (1 - exp(-i/tau)). Seeded by a log-grid
/// over tau (A0 solved in closed form per tau), refined by damped
/// Gauss-Newton.
inline SaturationFit fit_saturation(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 3) throw std::invalid_argument("fit_saturation: need at least 3 samples");
  double r_max = 0.0;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    if (!(samples[k].first > samples[k - 1].first)) {
      throw std::invalid_argument("fit_saturation: sample indices must be strictly increasing");
    }
  }
  for (const auto& [i, r] : samples) r_max = std::max(r_max, r);
  if (r_max <= 0.0) throw std::runtime_error("fit_saturation: degenerate data (all zero)");

  const double i_min = std::max(samples.front().first, 1.0);
  const double i_max = samples.back().first;

  // grid seed
  double best_a = r_max, best_tau = i_max, best_sse = std::numeric_limits<double>::infinity();
  const int grid = 60;
  const double lo = std::log(i_min / 100.0), hi = std::log(i_max * 100.0);
  for (int g = 0; g < grid; ++g) {
    const double tau = std::exp(lo + (hi - lo) * g / (grid - 1));
    double num = 0.0, den = 0.0;
    for (const auto& [i, r] : samples) {
      const double f = 1.0 - std::exp(-i / tau);
      num += r * f;
      den += f * f;
    }
    if (den <= 0.0) continue;
    const double a = num / den;
    const double sse = detail::saturation_sse(samples, a, tau);
    if (sse < best_sse) {
      best_sse = sse;
      best_a = a;
      best_tau = tau;
    }
  }

  // damped Gauss-Newton refinement
  double a = best_a, tau = best_tau, sse = best_sse;
  for (int iter = 0; iter < 200; ++iter) {
    double jaa = 0.0, jat = 0.0, jtt = 0.0, ga = 0.0, gt = 0.0;
    for (const auto& [i, r] : samples) {
      const double ex = std::exp(-i / tau);
      const double f = 1.0 - ex;
      const double res = a * f - r;
      const double da = f;
      const double dt = -a * ex * i / (tau * tau);
      jaa += da * da;
      jat += da * dt;
      jtt += dt * dt;
      ga += da * res;
      gt += dt * res;
    }
    const double det = jaa * jtt - jat * jat;
    if (std::abs(det) < 1e-300) break;
    double step_a = -(jtt * ga - jat * gt) / det;
    double step_t = -(jaa * gt - jat * ga) / det;
    double scale = 1.0;
    bool accepted = false;
    for (int half = 0; half < 40; ++half) {
      const double na = a + scale * step_a;
      const double nt = tau + scale * step_t;
      if (nt > 0.0) {
        const double nsse = detail::saturation_sse(samples, na, nt);
        if (nsse <= sse) {
          const double rel = std::max(std::abs(scale * step_a) / std::max(std::abs(a), 1e-300),
                                      std::abs(scale * step_t) / std::max(std::abs(tau), 1e-300));
          a = na;
          tau = nt;
          sse = nsse;
          accepted = rel >= 1e-10;
          break;
        }
      }
      scale *= 0.5;
    }
    if (!accepted) break;
  }

  SaturationFit fit;
  fit.a0 = a;
  fit.tau = tau;
  fit.residual_rms = std::sqrt(sse / static_cast<double>(samples.size()));
  return fit;
}

}  // namespace shellsep
