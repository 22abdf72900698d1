#include <gtest/gtest.h>

#include <cmath>

#include "encircle/errors.hpp"
#include "encircle/rng.hpp"
#include "encircle/sensing.hpp"

using namespace encircle;

namespace {

std::vector<DroneState> layout() {
  std::vector<DroneState> d;
  for (int i = 0; i < 6; ++i) d.push_back({i, Vec3(1.5 + 0.5 * i, 2.0, 2.0), Vec3::Zero()});
  return d;
}

std::vector<TargetState> targets() {
  return {{0, Vec2(-2.0, 2.5), Vec2::Zero()}, {1, Vec2(2.0, 1.0), Vec2::Zero()}, {2, Vec2(3.0, 2.5), Vec2::Zero()}};
}

}  // namespace

TEST(MeasureBatch, ZeroNoiseGivesTrueDistance) {
  SensorConfig cfg;
  cfg.q = 0.0;
  NoiseStream noise(1);
  const auto b = measure_batch({0, Vec3(0, 0, 2), Vec3::Zero()}, {0, Vec2(3, 4), Vec2::Zero()}, cfg, noise, 0);
  ASSERT_TRUE(b.has_value());
  ASSERT_EQ(b->samples.size(), 100u);
  for (double s : b->samples) EXPECT_EQ(s, 5.0);
}

TEST(MeasureBatch, OutOfRangeHasNoBatch) {
  SensorConfig cfg;
  NoiseStream noise(1);
  EXPECT_FALSE(measure_batch({0, Vec3(0, 0, 2), Vec3::Zero()}, {0, Vec2(10, 0), Vec2::Zero()}, cfg, noise, 0));
}

TEST(MeasureBatch, SampleVarianceMatchesConfig) {
  SensorConfig cfg;
  cfg.f = 1000;
  const DroneState drone{0, Vec3(0, 0, 2), Vec3::Zero()};
  const TargetState target{0, Vec2(1.0, 1.0), Vec2::Zero()};
  double sum = 0.0;
  double sum_sq = 0.0;
  long n = 0;
  for (long k = 0; k < 100; ++k) {
    NoiseStream noise = range_stream(11, 0, 0, k);
    const auto b = measure_batch(drone, target, cfg, noise, k);
    for (double s : b->samples) {
      const double e = s - std::sqrt(2.0);
      sum += e;
      sum_sq += e * e;
      ++n;
    }
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - mean * mean;
  EXPECT_NEAR(var / cfg.q, 1.0, 0.05);
}

TEST(MeasureBatch, SubstreamsAreReproducible) {
  SensorConfig cfg;
  const DroneState drone{2, Vec3(1, 1, 2), Vec3::Zero()};
  const TargetState target{1, Vec2(0, 0), Vec2::Zero()};
  NoiseStream a = range_stream(5, 2, 1, 17);
  NoiseStream b = range_stream(5, 2, 1, 17);
  NoiseStream c = range_stream(5, 2, 1, 18);
  const auto ba = measure_batch(drone, target, cfg, a, 17);
  const auto bb = measure_batch(drone, target, cfg, b, 17);
  const auto bc = measure_batch(drone, target, cfg, c, 17);
  EXPECT_EQ(ba->samples, bb->samples);
  EXPECT_NE(ba->samples, bc->samples);
}

TEST(RangeBatch, Statistics) {
  RangeBatch b{0, 0, 0, {1.0, 2.0, 3.0}};
  EXPECT_DOUBLE_EQ(b.first(), 1.0);
  EXPECT_DOUBLE_EQ(b.mean(), 2.0);
  EXPECT_DOUBLE_EQ(b.mean_square(), 14.0 / 3.0);
}

TEST(VisibleTargets, RadiusAndBoundary) {
  SensorConfig cfg;
  const DroneState d{0, Vec3(0, 0, 2), Vec3::Zero()};
  std::vector<TargetState> ts = {{0, Vec2(10, 0), Vec2::Zero()}, {1, Vec2(3, 4), Vec2::Zero()}};
  EXPECT_EQ(visible_targets(d, ts, cfg), std::vector<int>{1});
}

TEST(VisibleTargets, GoldenLayout) {
  SensorConfig cfg;
  const auto drones = layout();
  const auto ts = targets();
  EXPECT_EQ(visible_targets(drones[0], ts, cfg), (std::vector<int>{0, 1, 2}));
  EXPECT_NEAR(ground_distance(drones[0].position, ts[0].position), 3.5355339, 1e-6);
  // (3, 2) is just over 5 m from (-2, 2.5).
  EXPECT_EQ(visible_targets(drones[3], ts, cfg), (std::vector<int>{1, 2}));
  EXPECT_EQ(visible_targets(drones[5], ts, cfg), (std::vector<int>{1, 2}));
}

TEST(NeighborSet, Basics) {
  SensorConfig cfg;
  std::vector<DroneState> two = {{0, Vec3(0, 0, 2), Vec3::Zero()}, {1, Vec3(0.5, 0, 2), Vec3::Zero()}};
  EXPECT_EQ(neighbor_set(two[0], two, cfg), std::vector<int>{1});
  EXPECT_EQ(neighbor_set(two[1], two, cfg), std::vector<int>{0});
  std::vector<DroneState> far = {{0, Vec3(0, 0, 2), Vec3::Zero()}, {1, Vec3(50, 0, 2), Vec3::Zero()}};
  EXPECT_TRUE(neighbor_set(far[0], far, cfg).empty());
}

TEST(NeighborSet, GoldenLayoutFullyConnected) {
  SensorConfig cfg;
  const auto drones = layout();
  for (const auto& d : drones) EXPECT_EQ(neighbor_set(d, drones, cfg).size(), 5u);
}

TEST(SensorConfig, Validation) {
  SensorConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.r1 = 9.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SensorConfig{};
  cfg.q = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SensorConfig{};
  cfg.f = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(VisibleObstacles, ThreeDimensionalRange) {
  SensorConfig cfg;
  const DroneState d{0, Vec3(0, 0, 2), Vec3::Zero()};
  std::vector<Obstacle> obs = {{0, Vec3(0, 0, 7.5)}, {1, Vec3(3, 0, 2)}};
  EXPECT_EQ(visible_obstacles(d, obs, cfg), std::vector<int>{1});
}

TEST(NoiseStream, GaussianMoments) {
  NoiseStream s(mix_key({1, 2, 3}));
  double sum = 0.0;
  double sum_sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = s.gaussian();
    sum += g;
    sum_sq += g * g;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum_sq / n, 1.0, 0.01);
  EXPECT_EQ(s.gaussian(0.0), 0.0);
}
