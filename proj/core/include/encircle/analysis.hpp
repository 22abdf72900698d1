#pragma once

#include <Eigen/Core>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "encircle/assignment.hpp"
#include "encircle/model.hpp"

namespace encircle {

struct TargetMetrics {
  int target = 0;
  Vec4 est_error = Vec4::Zero();  ///< eta - eta_hat
  double est_error_norm = 0.0;
  double pos_error_norm = 0.0;    ///< |s - s_hat|
  Vec2 as_error = Vec2::Zero();   ///< p_lead + p_trail
  double as_error_norm = 0.0;
};

struct MetricsFrame {
  long k = 0;
  std::vector<TargetMetrics> targets;
  double min_drone_distance = std::numeric_limits<double>::infinity();
  double min_obstacle_distance = std::numeric_limits<double>::infinity();
};

/// `estimates[j]` is eta_hat for target j; `pairs` maps targets to their drones.
MetricsFrame compute_metrics(long k, std::span<const DroneState> drones,
                             std::span<const TargetState> targets, std::span<const Vec4> estimates,
                             std::span<const AssignedPair> pairs, std::span<const Obstacle> obstacles);

/// One instant of a pair's measurement geometry: F (x_i - x_g) and var_hat.
struct WindowSample {
  Vec2 relative_position = Vec2::Zero();
  double var_hat = 1.0;
};

struct ObservabilityReport {
  int window = 0;  ///< m1: number of samples minus one
  Eigen::MatrixXd O2;
  Mat4 O1 = Mat4::Zero();
  Eigen::VectorXd singular_values;
  Vec4 eigenvalues = Vec4::Zero();  ///< raw eigenvalues of O1, ascending
  int rank = 0;
  bool observable = false;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kEigenFloor = 1e-12;

/// Samples ordered oldest to newest; the newest is the reference instant k. The row
/// for lag m is -2 [p^T, -m t p^T]. Rank is taken from the singular values of O2
/// relative to the largest. Throws ArgumentError for fewer than 4 samples or a
/// non-positive var_hat.
ObservabilityReport observability_gramian(std::span<const WindowSample> window,
                                          const SystemMatrices& mats);

struct ControllabilityReport {
  int window = 0;
  Eigen::MatrixXd H2;
  Mat4 gramian = Mat4::Zero();
  Vec4 eigenvalues = Vec4::Zero();  ///< ascending
  bool positive_definite = false;
};

/// H2 Q_hat H2^T with H2 blocks [((2m+1)/2) t^2 I; t I] for m = 0..m1.
/// Throws ConfigError for m1 < 1, t <= 0 or a Q that is not symmetric PSD; a
/// singular Q yields a report with positive_definite = false.
ControllabilityReport controllability_gramian(int m1, double t, const Mat2& Q);

/// Covariance envelope from the Gramian extremes: upper = 1/Lambda1 + Lambda4 on
/// lambda_max(zeta), lower = 1/(1/Lambda3 + Lambda2) on lambda_min(zeta).
/// Infinite/zero when the relevant Gramian is singular.
struct CovarianceBounds {
  double upper = std::numeric_limits<double>::infinity();
  double lower = 0.0;
};

CovarianceBounds covariance_bounds(const ObservabilityReport& obs, const ControllabilityReport& ctrl);

struct BoundReport {
  std::size_t samples = 0;
  double ms_est_error = 0.0;  ///< mean of |e|^2
  double ms_as_error = 0.0;   ///< mean of |e_bar|^2
  double bound = 0.0;         ///< 4 a_hi ms_est_error + 2 t^4 q_check
  bool holds = false;
};

inline constexpr std::size_t kMinBoundSamples = 1000;

/// Inputs are squared norms. Throws AnalysisError with fewer than 1000 samples or
/// mismatched lengths.
BoundReport theorem_bounds(std::span<const double> est_error_sq, std::span<const double> as_error_sq,
                           double a_hi, double q_check, double t);

struct AuditReport {
  double min_drone_distance = std::numeric_limits<double>::infinity();
  double min_obstacle_distance = std::numeric_limits<double>::infinity();
  long drone_violations = 0;
  long obstacle_violations = 0;
  std::optional<long> first_violation;

  bool clean() const { return drone_violations == 0 && obstacle_violations == 0; }
  /// Combine two audits (min distances, summed counts).
  void merge(const AuditReport& other);
};

/// frames[k] lists drone positions at step k. Flags drone pairs closer than
/// 2 a_tilde and drone-obstacle distances below r_safe.
AuditReport collision_audit(std::span<const std::vector<Vec3>> frames, std::span<const Obstacle> obstacles,
                            double a_tilde, double r_safe);

/// Linear-interpolated quantile, p in [0, 1]. Throws AnalysisError on empty input.
double quantile(std::vector<double> values, double p);

}  // namespace encircle
