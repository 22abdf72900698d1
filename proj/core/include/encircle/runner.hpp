#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "encircle/analysis.hpp"
#include "encircle/assignment.hpp"
#include "encircle/controller.hpp"
#include "encircle/estimator.hpp"
#include "encircle/scenario.hpp"

namespace encircle {

struct EstimateRecord {
  int target = 0;
  Vec4 eta_hat = Vec4::Zero();
  double zeta_trace = 0.0;
  double zeta_min_eig = 0.0;
  double zeta_max_eig = 0.0;
  double theta = 0.0;
  double var_hat = 0.0;
  Vec2 relative_position = Vec2::Zero();  ///< F (x_lead - x_trail) used by the update
  bool updated = false;                   ///< false for initialisation or prediction-only steps
  bool clamped = false;
  bool degenerate = false;
};

struct DroneForceRecord {
  int drone = 0;
  ForceBreakdown forces;
  Vec3 command = Vec3::Zero();
};

/// Everything that happened at step k. States are at k; `omega` was applied to reach k+1.
struct StepRecord {
  long k = 0;
  std::vector<DroneState> drones;
  std::vector<TargetState> targets;
  std::vector<Vec2> omega;
  std::vector<EstimateRecord> estimates;
  std::vector<DroneForceRecord> forces;
  std::vector<AssignedPair> pairs;
  MetricsFrame metrics;
  std::vector<bool> force_free;  ///< per target: both drones feel no interaction or repulsion
};

struct TargetSummary {
  int target = 0;
  /// Post-transient series (k >= transient).
  std::vector<double> pos_error;     ///< |s - s_hat|
  std::vector<double> est_error_sq;  ///< |eta - eta_hat|^2
  std::vector<double> as_error;      ///< |p_lead + p_trail|
  double occupancy = 0.0;            ///< fraction of pos_error <= 0.4
  double ms_est_error = 0.0;
  double ms_as_error = 0.0;
  double max_zeta_condition = 0.0;
  double min_zeta_eig = 0.0;
  long clamp_events = 0;
  long longest_force_free = 0;
};

inline constexpr double kOccupancyBand = 0.4;

struct RunSummary {
  std::uint64_t seed = 0;
  long steps = 0;
  long transient = 0;
  std::vector<AssignedPair> pairs;
  int assignment_rounds = 0;
  std::vector<TargetSummary> targets;
  AuditReport audit;
  double max_z_drift = 0.0;
  double max_as_error_after_first = 0.0;  ///< max |e_bar| over k >= 1
  double max_pair_outer = 0.0;            ///< max |F p_ig|^2 over the run
  std::uint64_t log_hash = 0;
};

struct RunResult {
  std::vector<StepRecord> log;
  RunSummary summary;
  AssignmentResult assignment;
};

/// Runs the closed loop for cfg.steps steps. `seed` overrides cfg.seed.
/// Per step: sense, assign (k = 0 only, then frozen), estimate, forces and caps,
/// commands, then advance drones and targets. Errors are rethrown as RunError
/// carrying the step index and the original error code.
RunResult run_scenario(const ScenarioConfig& cfg, std::optional<std::uint64_t> seed = std::nullopt);

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::optional<RunSummary> summary;
  std::string error_code;
  std::string error_message;
  long error_step = -1;
};

struct PooledTarget {
  int target = 0;
  std::size_t samples = 0;
  double occupancy = 0.0;
  double ms_est_error = 0.0;
  double ms_as_error = 0.0;
  std::vector<double> pos_error_quantiles;  ///< at kReportQuantiles
  std::vector<double> as_error_quantiles;
  BoundReport bound;
  bool bound_evaluated = false;
};

inline constexpr double kReportQuantiles[] = {0.5, 0.9, 0.95, 0.99};

struct MonteCarloReport {
  std::vector<SeedOutcome> runs;
  std::vector<PooledTarget> targets;
  AuditReport audit;
  std::size_t failed = 0;
};

/// Runs every seed (in parallel when workers != 1; 0 picks the hardware count).
/// A failing seed is recorded in its SeedOutcome and excluded from pooling.
/// Throws ArgumentError for an empty seed list.
MonteCarloReport run_monte_carlo(const ScenarioConfig& cfg, std::span<const std::uint64_t> seeds,
                                 unsigned workers = 0);

/// Pooled statistics over the successful summaries (used by run_monte_carlo).
std::vector<PooledTarget> pool_targets(std::span<const RunSummary> summaries, double a_hi, double q_check,
                                       double t);

}  // namespace encircle
