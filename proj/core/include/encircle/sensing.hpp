#pragma once

#include <optional>
#include <span>
#include <vector>

#include "encircle/model.hpp"
#include "encircle/rng.hpp"

namespace encircle {

struct SensorConfig {
  double q = 0.005;  ///< range noise variance, m^2
  int f = 100;       ///< samples per sampling period
  double r1 = 10.0;  ///< communication radius, m
  double r2 = 5.0;   ///< measurement radius, m

  /// Throws ConfigError unless q > 0, f >= 1 and r1 >= 2 r2 > 0.
  void validate() const;
};

/// f repeated range samples from one drone to one target within one period.
struct RangeBatch {
  int drone_id = 0;
  int target_id = 0;
  long step = 0;
  std::vector<double> samples;

  double first() const;
  double mean() const;
  /// (1/f) sum of squared samples.
  double mean_square() const;
};

/// ||F x - s||.
double ground_distance(const Vec3& drone_position, const Vec2& target_position);

/// Samples ||F x_i - s_j|| + eps with eps ~ N(0, cfg.q), independently f times.
/// Returns nullopt when the target is outside the measurement radius.
/// Samples are kept as drawn (they may be negative); nothing is clamped here.
std::optional<RangeBatch> measure_batch(const DroneState& drone, const TargetState& target,
                                        const SensorConfig& cfg, NoiseStream& noise, long step);

/// Ids of targets within r2 of the drone's ground projection (boundary inclusive), ascending.
std::vector<int> visible_targets(const DroneState& drone, std::span<const TargetState> targets,
                                 const SensorConfig& cfg);

/// Ids of other drones within r1 (3-D distance, boundary inclusive), ascending.
std::vector<int> neighbor_set(const DroneState& drone, std::span<const DroneState> drones,
                              const SensorConfig& cfg);

/// Ids of obstacles within r2 (3-D distance). Obstacle positions are disclosed exactly.
std::vector<int> visible_obstacles(const DroneState& drone, std::span<const Obstacle> obstacles,
                                   const SensorConfig& cfg);

}  // namespace encircle
