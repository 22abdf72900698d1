#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "encircle/controller.hpp"
#include "encircle/model.hpp"
#include "encircle/sensing.hpp"

namespace encircle {

struct ScenarioFlags {
  bool noise = true;             ///< range noise and target driving noise
  bool attractive_only = false;  ///< drop interaction and repulsion
  bool perfect_estimate = false; ///< controller sees the true target state
};

struct TargetSpec {
  TargetState initial;
  Mat2 Q = 0.05 * Mat2::Identity();
  /// Optional replay of the driving acceleration; entry k is applied at step k.
  std::vector<Vec2> scripted_omega;
};

struct ScenarioConfig {
  std::string name = "scenario";
  double t = 0.8;
  long steps = 400;
  std::uint64_t seed = 1;
  long transient = 50;
  int window = 30;
  double eps_tilde = 1.5;
  double a_tilde = 0.1;  ///< drone body radius
  double b_tilde = 0.1;  ///< clearance margin
  Mat4 zeta0 = Mat4::Identity();
  std::vector<DroneState> drones;
  std::vector<TargetSpec> targets;
  std::vector<Obstacle> obstacles;
  SensorConfig sensor;
  ControllerParams controller;  ///< r_safe is kept equal to a_tilde + b_tilde
  PresetShape shape;
  ScenarioFlags flags;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

/// The six-drone, three-target layout with two obstacles near the initial paths.
ScenarioConfig golden_scenario();

ScenarioConfig parse_scenario_json(const std::string& text);
ScenarioConfig parse_scenario_yaml(const std::string& text);
/// Dispatches on extension: .json, .yaml or .yml. Throws ConfigError otherwise.
ScenarioConfig load_scenario(const std::filesystem::path& path);
/// Canonical JSON form; parse_scenario_json(scenario_to_json(c)) reproduces c.
std::string scenario_to_json(const ScenarioConfig& cfg);

}  // namespace encircle
