#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "shellsep/cloud.hpp"
#include "shellsep/rng.hpp"

using namespace shellsep;

namespace {

std::vector<Vec3> sphere_samples(int n, double radius, std::uint64_t seed) {
  Rng rng = make_ball_rng(seed, 7);
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) pts.push_back(random_unit_vector(rng) * radius);
  return pts;
}

}  // namespace

TEST_CASE("estimate_unit_length basics") {
  CHECK(estimate_unit_length({{0, 0, 0}, {1, 0, 0}}) == Catch::Approx(1.0));

  // unit square corners in a plane: each corner's NN is an adjacent corner
  CHECK(estimate_unit_length({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}) == Catch::Approx(1.0));

  CHECK_THROWS_AS(estimate_unit_length({{0, 0, 0}}), std::invalid_argument);
}

TEST_CASE("estimate_unit_length matches brute-force NN mean") {
  const auto pts = sphere_samples(500, 1.0, 42);
  const double expected = oracle::nn_mean_bruteforce(pts);
  CHECK(estimate_unit_length(pts) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("estimate_unit_length is rigid-motion invariant and scales linearly") {
  const auto pts = sphere_samples(300, 2.0, 3);
  const double base = estimate_unit_length(pts);

  std::vector<Vec3> moved;
  const double c = std::cos(0.7), s = std::sin(0.7);
  for (const Vec3& p : pts) {
    const Vec3 rotated{c * p.x - s * p.y, s * p.x + c * p.y, p.z};
    moved.push_back(rotated + Vec3{10.0, -4.0, 2.5});
  }
  CHECK(estimate_unit_length(moved) == Catch::Approx(base).epsilon(1e-9));

  std::vector<Vec3> scaled;
  for (const Vec3& p : pts) scaled.push_back(p * 3.5);
  CHECK(estimate_unit_length(scaled) == Catch::Approx(3.5 * base).epsilon(1e-9));
}

TEST_CASE("PointCloud invariants") {
  CHECK_THROWS_AS(PointCloud({{0, 0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(PointCloud({{0, 0, 0}, {1, 0, 0}}, {Label::Inter}), std::invalid_argument);
  const double bad = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(PointCloud({{0, 0, 0}, {bad, 0, 0}}), std::invalid_argument);

  PointCloud cloud({{0, 0, 0}, {1, 0, 0}}, {Label::Inter, Label::Outer});
  CHECK(cloud.r0() == Catch::Approx(1.0));
  CHECK(cloud.count_label(Label::Inter) == 1);
}

TEST_CASE("make_escape_boundary analytic cases") {
  PointCloud cube({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0},
                   {0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}});
  const auto b = make_escape_boundary(cube, 1.2);
  CHECK(b.center.x == Catch::Approx(0.5));
  CHECK(b.center.y == Catch::Approx(0.5));
  CHECK(b.center.z == Catch::Approx(0.5));
  CHECK(b.radius == Catch::Approx(1.2 * std::sqrt(3.0) / 2.0));

  // margin 1.0 puts the farthest point exactly on the boundary
  const auto tight = make_escape_boundary(cube, 1.0);
  double max_d = 0.0;
  for (const Vec3& p : cube.points()) max_d = std::max(max_d, distance(p, tight.center));
  CHECK(max_d == Catch::Approx(tight.radius).margin(1e-12));

  // antipodal pairs make the bbox center exactly the origin, so the radius
  // is exactly margin * sphere_radius
  auto samples = sphere_samples(1000, 10.0, 1);
  const std::size_t n = samples.size();
  for (std::size_t i = 0; i < n; ++i) samples.push_back(samples[i] * -1.0);
  PointCloud sphere(std::move(samples));
  CHECK(make_escape_boundary(sphere, 1.5).radius == Catch::Approx(15.0).margin(1e-9));

  CHECK_THROWS_AS(make_escape_boundary(cube, 0.5), std::invalid_argument);
}

TEST_CASE("escape boundary contains every point for any margin >= 1") {
  Rng rng = make_ball_rng(9, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> pts;
    const int n = 2 + static_cast<int>(uniform01(rng) * 50);
    for (int i = 0; i < n; ++i) {
      pts.push_back({uniform01(rng) * 20 - 10, uniform01(rng) * 6, uniform01(rng) * 100});
    }
    PointCloud cloud(std::move(pts));
    const double margin = 1.0 + uniform01(rng) * 2.0;
    const auto b = make_escape_boundary(cloud, margin);
    for (const Vec3& p : cloud.points()) CHECK(distance(p, b.center) <= b.radius * (1 + 1e-12));
  }
}
