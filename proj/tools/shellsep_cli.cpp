// shellsep: separate the interior shell of a double-layered point cloud by
// simulating particle diffusion inside it.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shellsep/io.hpp"
#include "shellsep/runner.hpp"
#include "shellsep/synthetic.hpp"

namespace {

using namespace shellsep;

// exit codes: 0 ok, 1 usage, 2 io/parse, 3 validation, 4 runtime
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;
constexpr int kExitRuntime = 4;

struct SimFlags {
  std::string config_path;
  std::optional<double> r_ball_factor, collision_margin_factor, l_max_factor, p_random_spawn;
  std::optional<double> dup_threshold, spawn_min_separation_factor, spawn_nn_reject_factor;
  std::optional<double> escape_margin_factor, perturb_angle;
  std::optional<int> max_steps, max_collisions, dup_streak, dup_window, max_spawn_points,
      probe_steps;
  std::optional<int> escape_watertight_threshold;
  std::optional<long> max_balls;
  std::optional<std::uint64_t> seed;
  std::vector<double> spawn_point;
  int workers = 1;
  int batch_size = 64;
};

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--config", f.config_path, "config file (key = value lines)");
  cmd->add_option("--r-ball-factor", f.r_ball_factor, "R_ball as a multiple of R_0");
  cmd->add_option("--collision-margin-factor", f.collision_margin_factor,
                  "collision margin as a multiple of R_ball");
  cmd->add_option("--l-max-factor", f.l_max_factor, "free-flight length as a multiple of R_0");
  cmd->add_option("--p-random-spawn", f.p_random_spawn, "probability of using a generated spawn point");
  cmd->add_option("--max-steps-per-ball", f.max_steps, "step limit per ball");
  cmd->add_option("--max-collisions-per-ball", f.max_collisions, "collision limit per ball");
  cmd->add_option("--max-balls", f.max_balls, "ball budget");
  cmd->add_option("--dup-threshold", f.dup_threshold, "duplication-rate termination threshold");
  cmd->add_option("--dup-streak", f.dup_streak, "consecutive balls above threshold to terminate");
  cmd->add_option("--dup-window", f.dup_window,
                  "trailing ball count for the termination duplication rate");
  cmd->add_option("--max-spawn-points", f.max_spawn_points, "spawn pool capacity");
  cmd->add_option("--spawn-min-separation-factor", f.spawn_min_separation_factor,
                  "min spawn separation as a multiple of R_ball");
  cmd->add_option("--probe-steps", f.probe_steps, "probe walk length for spawn validation");
  cmd->add_option("--spawn-nn-reject-factor", f.spawn_nn_reject_factor,
                  "near-surface rejection as a multiple of R_eff");
  cmd->add_option("--escape-margin-factor", f.escape_margin_factor, "escape boundary margin");
  cmd->add_option("--perturb-angle", f.perturb_angle, "max reflection perturbation (radians)");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--escape-watertight-threshold", f.escape_watertight_threshold,
                  "max escapes still classified watertight");
  cmd->add_option("--spawn-point", f.spawn_point, "initial spawn point x y z")->expected(3);
  cmd->add_option("--workers", f.workers, "worker threads (1 = serial)");
  cmd->add_option("--batch-size", f.batch_size, "balls per scheduling unit");
}

std::pair<SimConfig, ParallelConfig> resolve_config(const SimFlags& f) {
  SimConfig sim;
  ParallelConfig par;
  if (!f.config_path.empty()) {
    auto [s, p] = io::read_config(f.config_path);
    sim = s;
    par = p;
  }
  auto set = [](auto& field, const auto& opt) {
    if (opt) field = *opt;
  };
  set(sim.r_ball_factor, f.r_ball_factor);
  set(sim.collision_margin_factor, f.collision_margin_factor);
  set(sim.l_max_factor, f.l_max_factor);
  set(sim.p_random_spawn, f.p_random_spawn);
  set(sim.max_steps_per_ball, f.max_steps);
  set(sim.max_collisions_per_ball, f.max_collisions);
  set(sim.max_balls, f.max_balls);
  set(sim.dup_threshold, f.dup_threshold);
  set(sim.dup_streak, f.dup_streak);
  set(sim.dup_window, f.dup_window);
  set(sim.max_spawn_points, f.max_spawn_points);
  set(sim.spawn_min_separation_factor, f.spawn_min_separation_factor);
  set(sim.probe_steps, f.probe_steps);
  set(sim.spawn_nn_reject_factor, f.spawn_nn_reject_factor);
  set(sim.escape_margin_factor, f.escape_margin_factor);
  set(sim.perturb_angle, f.perturb_angle);
  set(sim.seed, f.seed);
  set(sim.escape_watertight_threshold, f.escape_watertight_threshold);
  if (f.spawn_point.size() == 3) {
    sim.spawn_point = Vec3{f.spawn_point[0], f.spawn_point[1], f.spawn_point[2]};
  }
  par.workers = f.workers;
  par.batch_size = f.batch_size;
  sim.validate();
  par.sim = sim;
  par.validate();
  return {sim, par};
}

int cmd_generate(const std::string& shape, int n_inner, int n_outer, double inner_radius,
                 double outer_radius, int holes, double hole_angle, double edge, double wall_gap,
                 std::uint64_t seed, const std::string& out) {
  PointCloud cloud = [&] {
    if (shape == "sphere" || shape == "open-sphere") {
      DoubleSphereSpec spec = shape == "open-sphere"
                                  ? open_double_sphere_spec(seed, holes, hole_angle)
                                  : DoubleSphereSpec{};
      spec.seed = seed;
      spec.inner_radius = inner_radius;
      spec.outer_radius = outer_radius;
      spec.n_inner = n_inner;
      spec.n_outer = n_outer;
      return generate_double_sphere(spec);
    }
    if (shape == "corner-box") return generate_sharp_corner_box(edge, wall_gap, n_inner, seed);
    throw std::invalid_argument("unknown shape '" + shape + "'");
  }();
  io::write_cloud(cloud, out);
  std::cout << "wrote " << cloud.size() << " labeled points (" << cloud.count_label(Label::Inter)
            << " inter, " << cloud.count_label(Label::Outer) << " outer) to " << out << "\n";
  return 0;
}

int cmd_separate(const std::string& in, const SimFlags& flags, const std::string& out_inter,
                 const std::string& out_report, const std::string& out_trace, int trace_stride,
                 bool report_timing) {
  auto [sim, par] = resolve_config(flags);
  const auto loaded = io::read_cloud(in);
  if (loaded.duplicates_removed > 0) {
    std::cerr << "note: removed " << loaded.duplicates_removed << " duplicate points\n";
  }
  const auto t0 = std::chrono::steady_clock::now();
  const SeparationResult result = par.workers > 1 ? run_parallel(loaded.cloud, par)
                                                  : run_simulation(loaded.cloud, sim);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::optional<SaturationFit> fit;
  if (loaded.cloud.labeled()) {
    std::vector<std::pair<double, double>> samples;
    samples.reserve(result.trace.size());
    for (const TraceRow& r : result.trace) {
      samples.push_back({static_cast<double>(r.i), r.r_inter});
    }
    try {
      if (samples.size() >= 3) fit = fit_saturation(samples);
    } catch (const std::exception&) {
      // flat or empty trace; report without a fit
    }
  }

  if (!out_inter.empty()) io::write_cloud(loaded.cloud, out_inter, &result.inter_indices);
  if (!out_trace.empty()) io::write_trace_csv(result.trace, out_trace, trace_stride);
  io::RunReportOptions opts;
  opts.include_timing = report_timing;
  opts.elapsed_seconds = elapsed;
  const auto report = io::make_run_report(sim, loaded.cloud, result, fit, opts);
  if (!out_report.empty()) io::write_json(report, out_report);

  std::cout << "balls_run=" << result.balls_run << " n_escape=" << result.n_escape
            << " watertight=" << (result.watertight ? "true" : "false")
            << " detected=" << result.inter_indices.size();
  if (loaded.cloud.labeled() && !result.trace.empty()) {
    std::cout << " r_inter=" << result.trace.back().r_inter
              << " r_outer=" << result.trace.back().r_outer;
  }
  std::cout << " elapsed_s=" << elapsed << "\n";
  return 0;
}

int cmd_evaluate(const std::string& detected_path, const std::string& truth_path,
                 const std::string& out) {
  const auto truth = io::read_cloud(truth_path);
  if (!truth.cloud.labeled()) throw std::invalid_argument("truth cloud has no labels");
  const auto detected = io::read_cloud(detected_path);

  // match detected points to truth indices by exact coordinates
  CollisionLog log(truth.cloud.size());
  std::map<std::tuple<double, double, double>, int> lookup;
  for (std::size_t i = 0; i < truth.cloud.size(); ++i) {
    const Vec3& p = truth.cloud.point(static_cast<int>(i));
    lookup[{p.x, p.y, p.z}] = static_cast<int>(i);
  }
  std::vector<int> hits;
  std::size_t unmatched = 0;
  for (const Vec3& p : detected.cloud.points()) {
    const auto it = lookup.find({p.x, p.y, p.z});
    if (it == lookup.end()) ++unmatched;
    else hits.push_back(it->second);
  }
  log.add_ball(hits, false, &truth.cloud);
  const auto [r_inter, r_outer] = detection_rates(log, truth.cloud);

  nlohmann::json j;
  j["r_inter"] = r_inter;
  j["r_outer"] = r_outer;
  j["c_inter"] = log.c_inter();
  j["c_outer"] = log.c_outer();
  j["n_inter"] = truth.cloud.count_label(Label::Inter);
  j["n_outer"] = truth.cloud.count_label(Label::Outer);
  j["unmatched_detected"] = unmatched;
  if (!out.empty()) io::write_json(j, out);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_bench(const std::string& in, const SimFlags& flags, std::vector<int> worker_counts,
              const std::string& out_csv) {
  auto [sim, par] = resolve_config(flags);
  (void)sim;
  const auto loaded = io::read_cloud(in);
  if (worker_counts.empty()) worker_counts = {1, 2, 4, 8};
  const auto reports = benchmark(loaded.cloud, worker_counts, par);
  std::ostringstream csv;
  csv << "implementation,workers,time_s,balls_per_s,r_inter\n";
  for (const auto& r : reports) {
    csv << r.implementation << ',' << r.workers << ',' << r.elapsed_seconds << ','
        << r.balls_per_second << ',' << r.r_inter << '\n';
  }
  std::cout << csv.str();
  if (!out_csv.empty()) {
    io::detail::AtomicWriter w(out_csv);
    w.stream() << csv.str();
    w.commit();
  }
  return 0;
}

int cmd_fit(const std::string& trace_csv, const std::string& column, const std::string& out) {
  std::ifstream in(trace_csv);
  if (!in) throw std::runtime_error("cannot open " + trace_csv);
  std::string line;
  if (!std::getline(in, line)) throw io::ParseError(trace_csv, 1, "empty file");
  std::vector<std::string> header;
  {
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) header.push_back(tok);
  }
  int col_i = -1, col_r = -1;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == "i") col_i = static_cast<int>(k);
    if (header[k] == column) col_r = static_cast<int>(k);
  }
  if (col_i < 0 || col_r < 0) {
    throw io::ParseError(trace_csv, 1, "missing column 'i' or '" + column + "'");
  }
  std::vector<std::pair<double, double>> samples;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<std::string> toks;
    while (std::getline(ss, tok, ',')) toks.push_back(tok);
    if (static_cast<int>(toks.size()) <= std::max(col_i, col_r)) {
      throw io::ParseError(trace_csv, lineno, "short row");
    }
    double i, r;
    if (!io::detail::parse_double(toks[static_cast<std::size_t>(col_i)], i) ||
        !io::detail::parse_double(toks[static_cast<std::size_t>(col_r)], r)) {
      throw io::ParseError(trace_csv, lineno, "invalid number");
    }
    samples.push_back({i, r});
  }
  const SaturationFit fit = fit_saturation(samples);
  nlohmann::json j{{"a0", fit.a0}, {"tau", fit.tau}, {"residual_rms", fit.residual_rms}};
  if (!out.empty()) io::write_json(j, out);
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion-based inner/outer shell separation for double-layered point clouds"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "generate a labeled synthetic fixture");
  std::string shape = "sphere";
  int n_inner = 20000, n_outer = 20000, holes = 1;
  double inner_radius = 1.0, outer_radius = 1.2, hole_angle = 0.25, edge = 10.0, wall_gap = 0.5;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--shape", shape, "sphere | open-sphere | corner-box")
      ->check(CLI::IsMember({"sphere", "open-sphere", "corner-box"}));
  gen->add_option("--n-inner", n_inner, "inner shell point count (corner-box: per shell)");
  gen->add_option("--n-outer", n_outer, "outer shell point count");
  gen->add_option("--inner-radius", inner_radius);
  gen->add_option("--outer-radius", outer_radius);
  gen->add_option("--holes", holes, "cap openings cut through both shells (open-sphere)");
  gen->add_option("--hole-angle", hole_angle, "cap angular radius (radians)");
  gen->add_option("--edge", edge, "inner box edge length (corner-box)");
  gen->add_option("--wall-gap", wall_gap, "shell separation (corner-box)");
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out, "output PLY")->required();

  // separate
  auto* sep = app.add_subcommand("separate", "run the diffusion separation");
  std::string sep_in, out_inter, out_report, out_trace;
  int trace_stride = 1;
  bool report_timing = false;
  SimFlags sep_flags;
  sep->add_option("--in", sep_in, "input cloud (PLY or XYZ)")->required();
  sep->add_option("--out-inter", out_inter, "detected layer PLY");
  sep->add_option("--out-report", out_report, "JSON report");
  sep->add_option("--out-trace", out_trace, "metric trace CSV");
  sep->add_option("--trace-stride", trace_stride, "emit every k-th trace row");
  sep->add_flag("--report-timing", report_timing,
                "include wall time in the JSON report (breaks byte-stability)");
  add_sim_flags(sep, sep_flags);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "score a detected cloud against labeled truth");
  std::string eval_detected, eval_truth, eval_out;
  eval->add_option("--detected", eval_detected, "detected PLY")->required();
  eval->add_option("--truth", eval_truth, "labeled truth PLY")->required();
  eval->add_option("--out", eval_out, "metrics JSON");

  // bench
  auto* bench = app.add_subcommand("bench", "parallel scaling benchmark");
  std::string bench_in, bench_out;
  std::vector<int> bench_workers;
  SimFlags bench_flags;
  bench->add_option("--in", bench_in, "input cloud")->required();
  bench->add_option("--worker-counts", bench_workers, "worker counts to test");
  bench->add_option("--out-csv", bench_out, "benchmark CSV");
  add_sim_flags(bench, bench_flags);

  // fit
  auto* fitc = app.add_subcommand("fit", "fit the saturation model to a trace column");
  std::string fit_trace, fit_column = "r_inter", fit_out;
  fitc->add_option("--trace", fit_trace, "trace CSV from separate")->required();
  fitc->add_option("--column", fit_column, "column to fit (default r_inter)");
  fitc->add_option("--out", fit_out, "fit JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      return cmd_generate(shape, n_inner, n_outer, inner_radius, outer_radius, holes, hole_angle,
                          edge, wall_gap, gen_seed, gen_out);
    }
    if (sep->parsed()) {
      return cmd_separate(sep_in, sep_flags, out_inter, out_report, out_trace, trace_stride,
                          report_timing);
    }
    if (eval->parsed()) return cmd_evaluate(eval_detected, eval_truth, eval_out);
    if (bench->parsed()) return cmd_bench(bench_in, bench_flags, bench_workers, bench_out);
    if (fitc->parsed()) return cmd_fit(fit_trace, fit_column, fit_out);
  } catch (const shellsep::io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
