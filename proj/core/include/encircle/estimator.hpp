#pragma once

#include <optional>
#include <utility>

#include "encircle/model.hpp"
#include "encircle/sensing.hpp"

namespace encircle {

using RowVec4 = Eigen::RowVector4d;

/// Per-target filter state.
struct EstimatorState {
  Vec4 eta_hat = Vec4::Zero();
  Mat4 zeta = Mat4::Identity();
  Mat4 zeta_pred = Mat4::Identity();
  Vec4 gain = Vec4::Zero();
};

/// Scalar pair measurement theta = d_i^2 - d_g^2 - |F x_i|^2 + |F x_g|^2 with its output row.
struct MeasurementRecord {
  double theta = 0.0;
  RowVec4 C = RowVec4::Zero();
  double mean_offset = 0.0;  ///< q_i - q_g
  double var_hat = 0.0;
  bool clamped = false;     ///< a mean(d^2) - q term was clamped at zero
  bool degenerate = false;  ///< F p_ig = 0; the update reduces to prediction
  Vec2 relative_position = Vec2::Zero();  ///< F (x_i - x_g)
};

/// theta uses the first sample of each batch; the full batches only feed var_hat.
/// Throws ArgumentError when the batches disagree on target or step, come from the
/// same drone, or are empty.
MeasurementRecord build_measurement(const RangeBatch& batch_i, const RangeBatch& batch_g,
                                    const Vec3& x_i, const Vec3& x_g, double q_i, double q_g);

/// var_hat = 2q_i^2 + 2q_g^2 + 4 max(0, ms_i - q_i) q_i + 4 max(0, ms_g - q_g) q_g,
/// where ms is the batch mean of squared samples. `clamped` reports a zero clamp.
double estimate_output_variance(double mean_square_i, double mean_square_g, double q_i,
                                double q_g, bool* clamped = nullptr);

/// One filter step. Throws NumericalError if the innovation variance is not positive
/// or the result is non-finite.
EstimatorState dtse_update(const EstimatorState& est, const MeasurementRecord& meas, const Mat2& Q,
                           const SystemMatrices& mats);

/// Time update only: eta_hat <- A2 eta_hat, zeta <- A2 zeta A2^T + B2 Q B2^T.
EstimatorState dtse_predict(const EstimatorState& est, const Mat2& Q, const SystemMatrices& mats);

/// (s_hat, nu_hat).
std::pair<Vec2, Vec2> extract_state(const EstimatorState& est);

/// Intersection of the circles |p - c_i| = r_i and |p - c_g| = r_g.
///
/// Tangent circles give the single contact point; disjoint or nested circles give
/// the midpoint of the centres. Both intersection points are equidistant from that
/// midpoint, so the one left of the c_i -> c_g baseline is returned.
Vec2 two_circle_position(const Vec2& c_i, double r_i, const Vec2& c_g, double r_g);

/// Position from the batch-mean ranges, zero velocity, zeta = zeta0.
/// Throws ConfigError unless zeta0 is symmetric positive definite.
EstimatorState init_estimator(const RangeBatch& batch_i, const RangeBatch& batch_g, const Vec3& x_i,
                              const Vec3& x_g, const Mat4& zeta0);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Mat4& m);

}  // namespace encircle
