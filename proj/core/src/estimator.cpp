#include "encircle/estimator.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "encircle/errors.hpp"

namespace encircle {

double estimate_output_variance(double mean_square_i, double mean_square_g, double q_i,
                                double q_g, bool* clamped) {
  const double raw_i = mean_square_i - q_i;
  const double raw_g = mean_square_g - q_g;
  if (clamped != nullptr) *clamped = raw_i < 0.0 || raw_g < 0.0;
  return 2.0 * q_i * q_i + 2.0 * q_g * q_g + 4.0 * std::max(0.0, raw_i) * q_i +
         4.0 * std::max(0.0, raw_g) * q_g;
}

MeasurementRecord build_measurement(const RangeBatch& batch_i, const RangeBatch& batch_g,
                                    const Vec3& x_i, const Vec3& x_g, double q_i, double q_g) {
  if (batch_i.target_id != batch_g.target_id || batch_i.step != batch_g.step) {
    throw ArgumentError("range batches refer to different targets or steps");
  }
  if (batch_i.drone_id == batch_g.drone_id) {
    throw ArgumentError("pair measurement needs two distinct drones");
  }
  if (batch_i.samples.empty() || batch_g.samples.empty()) {
    throw ArgumentError("empty range batch");
  }

  MeasurementRecord rec;
  const Vec2 fi = ground(x_i);
  const Vec2 fg = ground(x_g);
  const double di = batch_i.first();
  const double dg = batch_g.first();
  rec.theta = di * di - dg * dg - fi.squaredNorm() + fg.squaredNorm();
  rec.relative_position = fi - fg;
  rec.C << -2.0 * rec.relative_position.transpose(), 0.0, 0.0;
  rec.degenerate = rec.relative_position.squaredNorm() == 0.0;
  rec.mean_offset = q_i - q_g;
  rec.var_hat = estimate_output_variance(batch_i.mean_square(), batch_g.mean_square(), q_i, q_g,
                                         &rec.clamped);
  return rec;
}

EstimatorState dtse_predict(const EstimatorState& est, const Mat2& Q, const SystemMatrices& mats) {
  const Mat4& A = mats.A2();
  const Mat42& B = mats.B2();
  EstimatorState out;
  out.zeta_pred = A * est.zeta * A.transpose() + B * Q * B.transpose();
  out.zeta_pred = 0.5 * (out.zeta_pred + out.zeta_pred.transpose());
  out.zeta = out.zeta_pred;
  out.eta_hat = A * est.eta_hat;
  out.gain = Vec4::Zero();
  return out;
}

EstimatorState dtse_update(const EstimatorState& est, const MeasurementRecord& meas, const Mat2& Q,
                           const SystemMatrices& mats) {
  if (meas.degenerate || meas.C.isZero(0.0)) return dtse_predict(est, Q, mats);
  if (!(meas.var_hat > 0.0)) throw NumericalError("output variance estimate must be positive");

  const Mat4& A = mats.A2();
  EstimatorState out;
  out.zeta_pred = A * est.zeta * A.transpose() + mats.B2() * Q * mats.B2().transpose();
  out.zeta_pred = 0.5 * (out.zeta_pred + out.zeta_pred.transpose());

  const double denom = (meas.C * out.zeta_pred * meas.C.transpose())(0, 0) + meas.var_hat;
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw NumericalError("innovation variance is not positive");
  }
  out.gain = out.zeta_pred * meas.C.transpose() / denom;

  const Vec4 predicted = A * est.eta_hat;
  const double innovation = meas.theta - (meas.C * predicted)(0, 0) - meas.mean_offset;
  out.eta_hat = predicted + out.gain * innovation;
  out.zeta = (Mat4::Identity() - out.gain * meas.C) * out.zeta_pred;
  out.zeta = 0.5 * (out.zeta + out.zeta.transpose());

  if (!out.eta_hat.allFinite() || !out.zeta.allFinite() || !out.gain.allFinite()) {
    throw NumericalError("non-finite filter state");
  }
  return out;
}

std::pair<Vec2, Vec2> extract_state(const EstimatorState& est) {
  return {est.eta_hat.head<2>(), est.eta_hat.tail<2>()};
}

Vec2 two_circle_position(const Vec2& c_i, double r_i, const Vec2& c_g, double r_g) {
  const Vec2 mid = 0.5 * (c_i + c_g);
  const Vec2 delta = c_g - c_i;
  const double d = delta.norm();
  if (d == 0.0) return mid;
  const double tol = 1e-12 * std::max({1.0, d, r_i, r_g});
  if (d > r_i + r_g + tol || d < std::abs(r_i - r_g) - tol) return mid;

  const double a = (r_i * r_i - r_g * r_g + d * d) / (2.0 * d);
  const double h = std::sqrt(std::max(0.0, r_i * r_i - a * a));
  const Vec2 unit = delta / d;
  const Vec2 base = c_i + a * unit;
  const Vec2 left(-unit.y(), unit.x());
  return base + h * left;
}

double min_eigenvalue(const Mat4& m) {
  Eigen::SelfAdjointEigenSolver<Mat4> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

EstimatorState init_estimator(const RangeBatch& batch_i, const RangeBatch& batch_g, const Vec3& x_i,
                              const Vec3& x_g, const Mat4& zeta0) {
  if (!zeta0.allFinite() || !zeta0.isApprox(zeta0.transpose(), 1e-12) ||
      !(min_eigenvalue(0.5 * (zeta0 + zeta0.transpose())) > 0.0)) {
    throw ConfigError("initial covariance must be symmetric positive definite");
  }
  if (batch_i.samples.empty() || batch_g.samples.empty()) {
    throw ArgumentError("empty range batch");
  }
  EstimatorState est;
  est.eta_hat.head<2>() = two_circle_position(ground(x_i), std::abs(batch_i.mean()), ground(x_g),
                                              std::abs(batch_g.mean()));
  est.eta_hat.tail<2>().setZero();
  est.zeta = zeta0;
  est.zeta_pred = zeta0;
  return est;
}

}  // namespace encircle
