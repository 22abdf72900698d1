#include "encircle/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "encircle/errors.hpp"

namespace encircle {

void SensorConfig::validate() const {
  if (!(std::isfinite(q) && q > 0.0)) throw ConfigError("sensor noise variance q must be positive");
  if (f < 1) throw ConfigError("samples per period f must be >= 1");
  if (!(std::isfinite(r2) && r2 > 0.0)) throw ConfigError("measurement radius r2 must be positive");
  if (!(std::isfinite(r1) && r1 >= 2.0 * r2)) {
    throw ConfigError("communication radius r1 must be at least 2 * r2");
  }
}

double RangeBatch::first() const {
  if (samples.empty()) throw ArgumentError("empty range batch");
  return samples.front();
}

double RangeBatch::mean() const {
  if (samples.empty()) throw ArgumentError("empty range batch");
  return std::accumulate(samples.begin(), samples.end(), 0.0) /
         static_cast<double>(samples.size());
}

double RangeBatch::mean_square() const {
  if (samples.empty()) throw ArgumentError("empty range batch");
  double acc = 0.0;
  for (double d : samples) acc += d * d;
  return acc / static_cast<double>(samples.size());
}

double ground_distance(const Vec3& drone_position, const Vec2& target_position) {
  return (ground(drone_position) - target_position).norm();
}

std::optional<RangeBatch> measure_batch(const DroneState& drone, const TargetState& target,
                                        const SensorConfig& cfg, NoiseStream& noise, long step) {
  if (!(std::isfinite(cfg.q) && cfg.q >= 0.0) || cfg.f < 1) {
    throw ConfigError("measure_batch needs q >= 0 and f >= 1");
  }
  const double truth = ground_distance(drone.position, target.position);
  if (!std::isfinite(truth)) {
    throw ModelInputError("non-finite geometry for drone " + std::to_string(drone.id));
  }
  if (truth > cfg.r2) return std::nullopt;

  RangeBatch batch{drone.id, target.id, step, {}};
  batch.samples.reserve(static_cast<std::size_t>(cfg.f));
  for (int s = 0; s < cfg.f; ++s) {
    batch.samples.push_back(truth + noise.gaussian(cfg.q));
  }
  return batch;
}

std::vector<int> visible_targets(const DroneState& drone, std::span<const TargetState> targets,
                                 const SensorConfig& cfg) {
  std::vector<int> out;
  for (const auto& target : targets) {
    if (ground_distance(drone.position, target.position) <= cfg.r2) out.push_back(target.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> neighbor_set(const DroneState& drone, std::span<const DroneState> drones,
                              const SensorConfig& cfg) {
  std::vector<int> out;
  for (const auto& other : drones) {
    if (other.id == drone.id) continue;
    if ((drone.position - other.position).norm() <= cfg.r1) out.push_back(other.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> visible_obstacles(const DroneState& drone, std::span<const Obstacle> obstacles,
                                   const SensorConfig& cfg) {
  std::vector<int> out;
  for (const auto& obstacle : obstacles) {
    if ((drone.position - obstacle.position).norm() <= cfg.r2) out.push_back(obstacle.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace encircle
