#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "shellsep/cloud.hpp"
#include "shellsep/config.hpp"
#include "shellsep/metrics.hpp"
#include "shellsep/sim.hpp"

namespace shellsep::io {

/// Malformed input file; `line` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, int line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct LoadResult {
  PointCloud cloud;
  std::size_t duplicates_removed = 0;
};

namespace detail {

inline std::pair<std::vector<Vec3>, std::vector<Label>> dedup(std::vector<Vec3> points,
                                                              std::vector<Label> labels,
                                                              std::size_t& removed) {
  std::map<std::tuple<double, double, double>, bool> seen;
  std::vector<Vec3> out_p;
  std::vector<Label> out_l;
  out_p.reserve(points.size());
  removed = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto key = std::make_tuple(points[i].x, points[i].y, points[i].z);
    if (seen.emplace(key, true).second) {
      out_p.push_back(points[i]);
      if (!labels.empty()) out_l.push_back(labels[i]);
    } else {
      ++removed;
    }
  }
  return {std::move(out_p), std::move(out_l)};
}

inline bool parse_double(const std::string& tok, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(tok, &pos);
    return pos == tok.size();
  } catch (...) {
    return false;
  }
}

}  // namespace detail

/// ASCII PLY with float x,y,z and an optional integer `layer` property
/// (0 = Inter, 1 = Outer, anything else Unknown).
inline LoadResult read_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++lineno;
    return true;
  };

  if (!next_line() || line != "ply") throw ParseError(path, 1, "missing 'ply' magic");
  bool format_seen = false;
  long n_vertices = -1;
  std::vector<std::string> vertex_props;
  bool in_vertex_element = false;
  while (true) {
    if (!next_line()) throw ParseError(path, lineno, "unexpected end of header");
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "comment" || tok.empty()) continue;
    if (tok == "format") {
      std::string fmt, ver;
      ss >> fmt >> ver;
      if (fmt != "ascii") throw ParseError(path, lineno, "only ascii PLY is supported");
      format_seen = true;
    } else if (tok == "element") {
      std::string name;
      long count = 0;
      if (!(ss >> name >> count)) throw ParseError(path, lineno, "malformed element line");
      if (name == "vertex") {
        n_vertices = count;
        in_vertex_element = true;
      } else {
        in_vertex_element = false;
      }
    } else if (tok == "property") {
      if (in_vertex_element) {
        std::string type, name;
        if (!(ss >> type >> name)) throw ParseError(path, lineno, "malformed property line");
        if (type == "list") throw ParseError(path, lineno, "list properties unsupported on vertices");
        vertex_props.push_back(name);
      }
    } else if (tok == "end_header") {
      break;
    } else {
      throw ParseError(path, lineno, "unknown header keyword '" + tok + "'");
    }
  }
  if (!format_seen) throw ParseError(path, lineno, "missing format line");
  if (n_vertices < 0) throw ParseError(path, lineno, "missing vertex element");
  auto find_prop = [&](const std::string& name) -> int {
    for (std::size_t k = 0; k < vertex_props.size(); ++k) {
      if (vertex_props[k] == name) return static_cast<int>(k);
    }
    return -1;
  };
  const int ix = find_prop("x"), iy = find_prop("y"), iz = find_prop("z");
  const int il = find_prop("layer");
  if (ix < 0 || iy < 0 || iz < 0) throw ParseError(path, lineno, "vertex needs x, y, z properties");

  std::vector<Vec3> points;
  std::vector<Label> labels;
  points.reserve(static_cast<std::size_t>(n_vertices));
  for (long v = 0; v < n_vertices; ++v) {
    if (!next_line()) throw ParseError(path, lineno + 1, "unexpected end of vertex data");
    std::istringstream ss(line);
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t) toks.push_back(t);
    if (toks.size() != vertex_props.size()) {
      throw ParseError(path, lineno, "expected " + std::to_string(vertex_props.size()) +
                                         " values, got " + std::to_string(toks.size()));
    }
    double vals[3];
    for (int a = 0; a < 3; ++a) {
      const int idx = a == 0 ? ix : (a == 1 ? iy : iz);
      if (!detail::parse_double(toks[static_cast<std::size_t>(idx)], vals[a])) {
        throw ParseError(path, lineno, "invalid number '" + toks[static_cast<std::size_t>(idx)] + "'");
      }
    }
    points.push_back({vals[0], vals[1], vals[2]});
    if (il >= 0) {
      double lv;
      if (!detail::parse_double(toks[static_cast<std::size_t>(il)], lv)) {
        throw ParseError(path, lineno, "invalid layer value");
      }
      labels.push_back(lv == 0 ? Label::Inter : (lv == 1 ? Label::Outer : Label::Unknown));
    }
  }
  std::size_t removed = 0;
  auto [p, l] = detail::dedup(std::move(points), std::move(labels), removed);
  if (p.size() < 2) throw std::invalid_argument(path + ": need at least 2 distinct points");
  return {PointCloud(std::move(p), std::move(l)), removed};
}

/// Whitespace-separated x y z triples, one per line. Unlabeled.
inline LoadResult read_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Vec3> points;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t) toks.push_back(t);
    if (toks.empty()) continue;
    if (toks.size() != 3) throw ParseError(path, lineno, "expected 3 values per line");
    double v[3];
    for (int a = 0; a < 3; ++a) {
      if (!detail::parse_double(toks[static_cast<std::size_t>(a)], v[a])) {
        throw ParseError(path, lineno, "invalid number '" + toks[static_cast<std::size_t>(a)] + "'");
      }
    }
    points.push_back({v[0], v[1], v[2]});
  }
  std::size_t removed = 0;
  auto [p, l] = detail::dedup(std::move(points), {}, removed);
  if (p.size() < 2) throw std::invalid_argument(path + ": need at least 2 distinct points");
  return {PointCloud(std::move(p), std::move(l)), removed};
}

inline LoadResult read_cloud(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".xyz") return read_xyz(path);
  return read_ply(path);
}

namespace detail {

/// Write to a temp file next to the target, then rename.
class AtomicWriter {
 public:
  explicit AtomicWriter(const std::string& path) : path_(path), tmp_(path + ".tmp") {
    out_.open(tmp_, std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot write " + tmp_);
  }
  std::ofstream& stream() { return out_; }
  void commit() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed for " + tmp_);
    out_.close();
    std::filesystem::rename(tmp_, path_);
  }

 private:
  std::string path_, tmp_;
  std::ofstream out_;
};

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// ASCII PLY writer. When `subset` is given only those indices are written,
/// in the given order. Labels are emitted as a uchar `layer` property when
/// the cloud is labeled.
inline void write_cloud(const PointCloud& cloud, const std::string& path,
                        const std::vector<int>* subset = nullptr) {
  detail::AtomicWriter w(path);
  auto& out = w.stream();
  const std::size_t n = subset ? subset->size() : cloud.size();
  out << "ply\nformat ascii 1.0\nelement vertex " << n
      << "\nproperty float x\nproperty float y\nproperty float z\n";
  if (cloud.labeled()) out << "property uchar layer\n";
  out << "end_header\n";
  auto emit = [&](int idx) {
    const Vec3& p = cloud.point(idx);
    out << detail::fmt_double(p.x) << ' ' << detail::fmt_double(p.y) << ' '
        << detail::fmt_double(p.z);
    if (cloud.labeled()) out << ' ' << static_cast<int>(cloud.label(idx));
    out << '\n';
  };
  if (subset) {
    for (int idx : *subset) emit(idx);
  } else {
    for (std::size_t i = 0; i < cloud.size(); ++i) emit(static_cast<int>(i));
  }
  w.commit();
}

/// Flat `key = value` config file with '#' comments. Unknown keys are errors;
/// missing keys keep their defaults.
inline std::pair<SimConfig, ParallelConfig> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  SimConfig sim;
  ParallelConfig par;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string trimmed;
    // collapse whitespace check: skip blank lines
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path, lineno, "expected 'key = value'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError(path, lineno, "expected 'key = value'");

    auto as_double = [&](double& field) {
      if (!detail::parse_double(value, field)) {
        throw ParseError(path, lineno, "invalid number for " + key);
      }
    };
    auto as_int = [&](auto& field) {
      double d;
      if (!detail::parse_double(value, d) || d != static_cast<long long>(d)) {
        throw ParseError(path, lineno, "invalid integer for " + key);
      }
      field = static_cast<std::remove_reference_t<decltype(field)>>(d);
    };
    if (key == "r_ball_factor") as_double(sim.r_ball_factor);
    else if (key == "collision_margin_factor") as_double(sim.collision_margin_factor);
    else if (key == "l_max_factor") as_double(sim.l_max_factor);
    else if (key == "p_random_spawn") as_double(sim.p_random_spawn);
    else if (key == "max_steps_per_ball") as_int(sim.max_steps_per_ball);
    else if (key == "max_collisions_per_ball") as_int(sim.max_collisions_per_ball);
    else if (key == "max_balls") as_int(sim.max_balls);
    else if (key == "dup_threshold") as_double(sim.dup_threshold);
    else if (key == "dup_streak") as_int(sim.dup_streak);
    else if (key == "dup_window") as_int(sim.dup_window);
    else if (key == "max_spawn_points") as_int(sim.max_spawn_points);
    else if (key == "spawn_min_separation_factor") as_double(sim.spawn_min_separation_factor);
    else if (key == "probe_steps") as_int(sim.probe_steps);
    else if (key == "spawn_nn_reject_factor") as_double(sim.spawn_nn_reject_factor);
    else if (key == "escape_margin_factor") as_double(sim.escape_margin_factor);
    else if (key == "perturb_angle") as_double(sim.perturb_angle);
    else if (key == "seed") as_int(sim.seed);
    else if (key == "escape_watertight_threshold") as_int(sim.escape_watertight_threshold);
    else if (key == "workers") as_int(par.workers);
    else if (key == "batch_size") as_int(par.batch_size);
    else if (key == "spawn_point") {
      std::istringstream vs(value);
      Vec3 p;
      char comma1 = 0, comma2 = 0;
      if (!(vs >> p.x >> comma1 >> p.y >> comma2 >> p.z) || comma1 != ',' || comma2 != ',') {
        throw ParseError(path, lineno, "spawn_point expects 'x, y, z'");
      }
      sim.spawn_point = p;
    } else {
      throw ParseError(path, lineno, "unknown key '" + key + "'");
    }
  }
  sim.validate();
  par.sim = sim;
  par.validate();
  return {sim, par};
}

/// Trace CSV; rows with undefined R_dup leave the r_dup field empty.
/// `stride` > 1 keeps every stride-th row (the last row is always kept).
inline void write_trace_csv(const MetricTrace& trace, const std::string& path, int stride = 1) {
  detail::AtomicWriter w(path);
  auto& out = w.stream();
  out << "i,collide,new,dup,r_dup,c_inter,c_outer,r_inter,r_outer,n_escape\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (stride > 1 && k % static_cast<std::size_t>(stride) != 0 && k + 1 != trace.size()) continue;
    const TraceRow& r = trace[k];
    out << r.i << ',' << r.collide << ',' << r.new_count << ',' << r.dup << ',';
    if (!std::isnan(r.r_dup)) out << detail::fmt_double(r.r_dup);
    out << ',' << r.c_inter << ',' << r.c_outer << ',' << detail::fmt_double(r.r_inter) << ','
        << detail::fmt_double(r.r_outer) << ',' << r.n_escape << '\n';
  }
  w.commit();
}

inline nlohmann::json config_to_json(const SimConfig& c) {
  nlohmann::json j{{"r_ball_factor", c.r_ball_factor},
                   {"collision_margin_factor", c.collision_margin_factor},
                   {"l_max_factor", c.l_max_factor},
                   {"p_random_spawn", c.p_random_spawn},
                   {"max_steps_per_ball", c.max_steps_per_ball},
                   {"max_collisions_per_ball", c.max_collisions_per_ball},
                   {"max_balls", c.max_balls},
                   {"dup_threshold", c.dup_threshold},
                   {"dup_streak", c.dup_streak},
                   {"dup_window", c.dup_window},
                   {"max_spawn_points", c.max_spawn_points},
                   {"spawn_min_separation_factor", c.spawn_min_separation_factor},
                   {"probe_steps", c.probe_steps},
                   {"spawn_nn_reject_factor", c.spawn_nn_reject_factor},
                   {"escape_margin_factor", c.escape_margin_factor},
                   {"perturb_angle", c.perturb_angle},
                   {"seed", c.seed},
                   {"escape_watertight_threshold", c.escape_watertight_threshold}};
  if (c.spawn_point) j["spawn_point"] = {c.spawn_point->x, c.spawn_point->y, c.spawn_point->z};
  return j;
}

struct RunReportOptions {
  bool include_timing = false;  // timing varies run to run; off keeps reports byte-stable
  double elapsed_seconds = 0.0;
};

inline nlohmann::json make_run_report(const SimConfig& cfg, const PointCloud& cloud,
                                      const SeparationResult& result,
                                      const std::optional<SaturationFit>& fit,
                                      const RunReportOptions& opts = {}) {
  nlohmann::json j;
  j["config"] = config_to_json(cfg);
  j["n_t"] = cloud.size();
  if (cloud.labeled()) {
    j["n_inter"] = cloud.count_label(Label::Inter);
    j["n_outer"] = cloud.count_label(Label::Outer);
  }
  j["balls_run"] = result.balls_run;
  j["n_escape"] = result.n_escape;
  j["n_nescap"] = result.n_nescap;
  j["watertight"] = result.watertight;
  j["termination_reason"] =
      result.termination_reason == TerminationReason::DupStreak ? "dup_streak" : "max_balls";
  j["detected_points"] = result.inter_indices.size();
  j["spawn_points_generated"] = result.spawn_points_generated;
  if (cloud.labeled() && !result.trace.empty()) {
    j["r_inter"] = result.trace.back().r_inter;
    j["r_outer"] = result.trace.back().r_outer;
  }
  if (fit) {
    j["fit"] = {{"a0", fit->a0}, {"tau", fit->tau}, {"residual_rms", fit->residual_rms}};
  }
  if (opts.include_timing) j["elapsed_seconds"] = opts.elapsed_seconds;
  return j;
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  detail::AtomicWriter w(path);
  w.stream() << j.dump(2) << '\n';
  w.commit();
}

}  // namespace shellsep::io
