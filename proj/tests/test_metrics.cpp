#include <numeric>

#include <catch2/catch_amalgamated.hpp>

#include "shellsep/metrics.hpp"
#include "shellsep/rng.hpp"

using namespace shellsep;

TEST_CASE("duplication_rate per-ball accounting") {
  CollisionLog log(200);
  log.add_ball({3, 7}, false, nullptr);
  CHECK(duplication_rate(log, 0) == 0.0);

  log.add_ball({3, 7, 9}, false, nullptr);  // 3,7 dup; 9 new
  CHECK(*duplication_rate(log, 1) == Catch::Approx(2.0 / 3.0));

  log.add_ball({3, 7, 9}, false, nullptr);  // all seen
  CHECK(*duplication_rate(log, 2) == 1.0);

  log.add_ball({}, false, nullptr);
  CHECK_FALSE(duplication_rate(log, 3).has_value());

  // 100 unique points, 99 previously seen
  std::vector<int> first(99), second(100);
  std::iota(first.begin(), first.end(), 100);
  std::iota(second.begin(), second.end(), 100);
  CollisionLog log2(300);
  log2.add_ball(first, false, nullptr);
  log2.add_ball(second, false, nullptr);
  CHECK(*duplication_rate(log2, 1) == Catch::Approx(0.99));
}

TEST_CASE("repeated hits within one ball count once") {
  CollisionLog log(10);
  const auto& e = log.add_ball({4, 4, 4, 2}, false, nullptr);
  CHECK(e.collide == 2);
  CHECK(e.new_count == 2);
  CHECK(e.dup == 0);
}

TEST_CASE("new + dup = collide and visited grows monotonically") {
  Rng rng = make_ball_rng(31, 0);
  CollisionLog log(500);
  std::size_t prev_visited = 0;
  for (int ball = 0; ball < 200; ++ball) {
    std::vector<int> hits;
    const int n = static_cast<int>(uniform01(rng) * 8);
    for (int k = 0; k < n; ++k) hits.push_back(static_cast<int>(uniform01(rng) * 500));
    const auto& e = log.add_ball(hits, false, nullptr);
    REQUIRE(e.new_count + e.dup == e.collide);
    REQUIRE(log.visited_count() == prev_visited + static_cast<std::size_t>(e.new_count));
    prev_visited = log.visited_count();
  }
}

TEST_CASE("detection_rates") {
  std::vector<Vec3> pts;
  std::vector<Label> labels;
  for (int i = 0; i < 10; ++i) {
    pts.push_back({static_cast<double>(i), 0, 0});
    labels.push_back(i < 5 ? Label::Inter : Label::Outer);
  }
  PointCloud cloud(pts, labels);

  CollisionLog all_inter(10);
  all_inter.add_ball({0, 1, 2, 3, 4}, false, &cloud);
  CHECK(detection_rates(all_inter, cloud) == std::pair<double, double>{1.0, 0.0});

  CollisionLog empty(10);
  CHECK(detection_rates(empty, cloud) == std::pair<double, double>{0.0, 0.0});

  PointCloud unlabeled(pts);
  CHECK_THROWS_AS(detection_rates(empty, unlabeled), std::invalid_argument);
}

TEST_CASE("detection_rates arithmetic on a constructed log") {
  const int n = 20000;
  std::vector<Vec3> pts;
  std::vector<Label> labels;
  pts.reserve(2 * n);
  for (int i = 0; i < 2 * n; ++i) {
    pts.push_back({static_cast<double>(i), 0, 0});
    labels.push_back(i < n ? Label::Inter : Label::Outer);
  }
  PointCloud cloud(pts, labels);
  CollisionLog log(2 * n);
  std::vector<int> hits;
  for (int i = 0; i < 19400; ++i) hits.push_back(i);          // inter detections
  for (int i = n; i < n + 20; ++i) hits.push_back(i);         // outer detections
  log.add_ball(hits, false, &cloud);
  const auto [ri, ro] = detection_rates(log, cloud);
  CHECK(ri == Catch::Approx(0.97));
  CHECK(ro == Catch::Approx(0.001));
}

TEST_CASE("classify_watertight threshold is strict") {
  CHECK(classify_watertight(0, 5));
  CHECK(classify_watertight(5, 5));
  CHECK_FALSE(classify_watertight(6, 5));
}

TEST_CASE("fit_saturation recovers noiseless parameters") {
  std::vector<std::pair<double, double>> samples;
  for (int i = 10; i <= 1000; i += 10) {
    samples.push_back({i, 0.9 * (1.0 - std::exp(-i / 100.0))});
  }
  const auto fit = fit_saturation(samples);
  CHECK(fit.a0 == Catch::Approx(0.9).epsilon(1e-6));
  CHECK(fit.tau == Catch::Approx(100.0).epsilon(1e-6));
  CHECK(fit.residual_rms < 1e-9);
}

TEST_CASE("fit_saturation on a constant series") {
  std::vector<std::pair<double, double>> samples;
  for (int i = 100; i <= 2000; i += 100) samples.push_back({i, 0.5});
  const auto fit = fit_saturation(samples);
  CHECK(fit.a0 == Catch::Approx(0.5).margin(1e-4));
  CHECK(fit.residual_rms < 1e-4);
}

TEST_CASE("fit_saturation rejects degenerate input") {
  CHECK_THROWS_AS(fit_saturation({{1, 0.1}, {2, 0.2}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_saturation({{1, 0.0}, {2, 0.0}, {3, 0.0}}), std::runtime_error);
  CHECK_THROWS_AS(fit_saturation({{1, 0.1}, {1, 0.2}, {3, 0.3}}), std::invalid_argument);
}

TEST_CASE("fit_saturation property: random parameter recovery") {
  Rng rng = make_ball_rng(77, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const double a0 = 0.1 + uniform01(rng) * 0.9;
    const double tau = 10.0 + uniform01(rng) * 9990.0;
    std::vector<std::pair<double, double>> samples;
    for (int k = 1; k <= 120; ++k) {
      const double i = k * tau / 20.0;  // cover the knee and the plateau
      samples.push_back({i, a0 * (1.0 - std::exp(-i / tau))});
    }
    const auto fit = fit_saturation(samples);
    REQUIRE(fit.a0 == Catch::Approx(a0).epsilon(1e-5));
    REQUIRE(fit.tau == Catch::Approx(tau).epsilon(1e-5));
  }
}
