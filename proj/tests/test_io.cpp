#include <cstdio>
#include <filesystem>
#include <fstream>

#include <catch2/catch_amalgamated.hpp>

#include "bad_files.hpp"
#include "shellsep/io.hpp"
#include "shellsep/synthetic.hpp"

using namespace shellsep;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("shellsep_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_file(const TempDir& dir, const std::string& name, const std::string& content) {
  const std::string p = dir.file(name);
  std::ofstream out(p);
  out << content;
  return p;
}

}  // namespace

TEST_CASE("read_ply basics") {
  TempDir dir;
  const auto path = write_file(dir, "three.ply",
                               "ply\nformat ascii 1.0\nelement vertex 3\n"
                               "property float x\nproperty float y\nproperty float z\n"
                               "end_header\n0 0 0\n1 0 0\n0 1 0\n");
  const auto loaded = io::read_ply(path);
  CHECK(loaded.cloud.size() == 3);
  CHECK_FALSE(loaded.cloud.labeled());
  CHECK(loaded.cloud.label(0) == Label::Unknown);
  CHECK(loaded.duplicates_removed == 0);
}

TEST_CASE("read_ply with layer labels") {
  TempDir dir;
  const auto path = write_file(dir, "labeled.ply",
                               "ply\nformat ascii 1.0\ncomment labeled fixture\n"
                               "element vertex 3\n"
                               "property float x\nproperty float y\nproperty float z\n"
                               "property uchar layer\n"
                               "end_header\n0 0 0 0\n1 0 0 1\n0 1 0 7\n");
  const auto loaded = io::read_ply(path);
  REQUIRE(loaded.cloud.labeled());
  CHECK(loaded.cloud.label(0) == Label::Inter);
  CHECK(loaded.cloud.label(1) == Label::Outer);
  CHECK(loaded.cloud.label(2) == Label::Unknown);
}

TEST_CASE("read_xyz deduplicates exact duplicates") {
  TempDir dir;
  const auto path = write_file(dir, "dup.xyz", "0 0 0\n1 0 0\n0 0 0\n");
  const auto loaded = io::read_xyz(path);
  CHECK(loaded.cloud.size() == 2);
  CHECK(loaded.duplicates_removed == 1);
}

TEST_CASE("cloud round-trip is lossless") {
  DoubleSphereSpec spec;
  spec.n_inner = 5000;
  spec.n_outer = 5000;
  spec.seed = 17;
  const auto cloud = generate_double_sphere(spec);
  TempDir dir;
  const auto path = dir.file("roundtrip.ply");
  io::write_cloud(cloud, path);
  const auto loaded = io::read_ply(path);
  REQUIRE(loaded.cloud.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    REQUIRE(distance(loaded.cloud.point(static_cast<int>(i)), cloud.point(static_cast<int>(i))) <
            1e-9);
    REQUIRE(loaded.cloud.label(static_cast<int>(i)) == cloud.label(static_cast<int>(i)));
  }

  // write -> read -> write again is byte-identical
  const auto path2 = dir.file("roundtrip2.ply");
  io::write_cloud(loaded.cloud, path2);
  std::ifstream a(path), b(path2);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}

TEST_CASE("subset export") {
  PointCloud cloud({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {Label::Inter, Label::Outer, Label::Inter});
  TempDir dir;
  const auto path = dir.file("subset.ply");
  std::vector<int> subset{0, 2};
  io::write_cloud(cloud, path, &subset);
  const auto loaded = io::read_ply(path);
  CHECK(loaded.cloud.size() == 2);
  CHECK(loaded.cloud.point(1).x == Catch::Approx(2.0));

  // empty subset still writes a valid (if unreadable-as-cloud) PLY
  std::vector<int> empty;
  const auto path0 = dir.file("empty.ply");
  io::write_cloud(cloud, path0, &empty);
  std::ifstream in(path0);
  std::string first;
  std::getline(in, first);
  CHECK(first == "ply");
  CHECK_THROWS(io::read_ply(path0));  // < 2 points
}

TEST_CASE("malformed files are rejected with line numbers") {
  TempDir dir;
  const auto& corpus = fixtures::bad_cloud_files();
  int checked = 0;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const auto& bad = corpus[k];
    const auto path =
        write_file(dir, "bad" + std::to_string(k) + (bad.xyz ? ".xyz" : ".ply"), bad.content);
    try {
      io::read_cloud(path);
      FAIL("expected parse error for corpus file " + std::to_string(k));
    } catch (const io::ParseError& e) {
      REQUIRE(e.line() == bad.line);
      ++checked;
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("config parsing") {
  TempDir dir;

  const auto empty = write_file(dir, "empty.cfg", "# nothing here\n\n");
  const auto [sim0, par0] = io::read_config(empty);
  SimConfig defaults;
  CHECK(sim0.r_ball_factor == defaults.r_ball_factor);
  CHECK(sim0.max_balls == defaults.max_balls);
  CHECK(par0.workers == 1);

  const auto one = write_file(dir, "one.cfg", "r_ball_factor = 3.0\n");
  const auto [sim1, par1] = io::read_config(one);
  CHECK(sim1.r_ball_factor == 3.0);
  CHECK(sim1.l_max_factor == defaults.l_max_factor);

  const auto bad = write_file(dir, "bad.cfg", "r_ball_factor = -1\n");
  CHECK_THROWS_AS(io::read_config(bad), std::invalid_argument);

  const auto unknown = write_file(dir, "unknown.cfg", "r_bal_factor = 2.0\n");
  CHECK_THROWS_AS(io::read_config(unknown), io::ParseError);

  const auto mistyped = write_file(dir, "mistyped.cfg", "max_balls = many\n");
  CHECK_THROWS_AS(io::read_config(mistyped), io::ParseError);

  const auto full = write_file(dir, "full.cfg",
                               "seed = 42\nworkers = 4\nbatch_size = 16\n"
                               "spawn_point = 0.5, 0.25, -1.0\nperturb_angle = 0.1\n");
  const auto [sim2, par2] = io::read_config(full);
  CHECK(sim2.seed == 42);
  CHECK(par2.workers == 4);
  CHECK(par2.batch_size == 16);
  REQUIRE(sim2.spawn_point.has_value());
  CHECK(sim2.spawn_point->y == 0.25);
}

TEST_CASE("trace CSV emission") {
  MetricTrace trace;
  for (int i = 1; i <= 5; ++i) {
    TraceRow row;
    row.i = i;
    row.collide = i;
    row.new_count = 1;
    row.dup = i - 1;
    if (i > 1) row.r_dup = static_cast<double>(i - 1) / i;
    row.r_inter = 0.1 * i;
    trace.push_back(row);
  }
  TempDir dir;
  const auto path = dir.file("trace.csv");
  io::write_trace_csv(trace, path);
  std::ifstream in(path);
  std::string header, row1, row2;
  std::getline(in, header);
  CHECK(header == "i,collide,new,dup,r_dup,c_inter,c_outer,r_inter,r_outer,n_escape");
  std::getline(in, row1);
  CHECK(row1.substr(0, 10) == "1,1,1,0,,0");  // undefined r_dup is empty
  std::getline(in, row2);
  CHECK(row2.substr(0, 4) == "2,2,");
}
