#include "encircle/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "encircle/errors.hpp"

namespace encircle {

MetricsFrame compute_metrics(long k, std::span<const DroneState> drones,
                             std::span<const TargetState> targets, std::span<const Vec4> estimates,
                             std::span<const AssignedPair> pairs, std::span<const Obstacle> obstacles) {
  if (estimates.size() != targets.size()) throw ArgumentError("one estimate per target required");
  MetricsFrame frame;
  frame.k = k;
  for (const auto& pair : pairs) {
    const auto j = static_cast<std::size_t>(pair.target);
    const TargetState& s = targets[j];
    TargetMetrics m;
    m.target = pair.target;
    m.est_error = s.stacked() - estimates[j];
    m.est_error_norm = m.est_error.norm();
    m.pos_error_norm = m.est_error.head<2>().norm();
    const Vec2 p_lead = ground(drones[static_cast<std::size_t>(pair.lead)].position) - s.position;
    const Vec2 p_trail = ground(drones[static_cast<std::size_t>(pair.trail)].position) - s.position;
    m.as_error = p_lead + p_trail;
    m.as_error_norm = m.as_error.norm();
    frame.targets.push_back(m);
  }
  for (std::size_t a = 0; a < drones.size(); ++a) {
    for (std::size_t b = a + 1; b < drones.size(); ++b) {
      frame.min_drone_distance =
          std::min(frame.min_drone_distance, (drones[a].position - drones[b].position).norm());
    }
    for (const auto& o : obstacles) {
      frame.min_obstacle_distance =
          std::min(frame.min_obstacle_distance, (drones[a].position - o.position).norm());
    }
  }
  return frame;
}

ObservabilityReport observability_gramian(std::span<const WindowSample> window,
                                          const SystemMatrices& mats) {
  if (window.size() < 4) throw ArgumentError("observability window needs at least 4 samples");
  const int n = static_cast<int>(window.size());
  const double t = mats.t();

  ObservabilityReport rep;
  rep.window = n - 1;
  rep.O2.resize(n, 4);
  Eigen::VectorXd weights(n);
  for (int r = 0; r < n; ++r) {
    const WindowSample& w = window[static_cast<std::size_t>(r)];
    if (!(w.var_hat > 0.0)) throw ArgumentError("window variance must be positive");
    const double lag = static_cast<double>(n - 1 - r);
    rep.O2.row(r) << -2.0 * w.relative_position.transpose(), 2.0 * lag * t * w.relative_position.transpose();
    weights(r) = 1.0 / w.var_hat;
  }
  rep.O1 = rep.O2.transpose() * weights.asDiagonal() * rep.O2;
  rep.O1 = 0.5 * (rep.O1 + rep.O1.transpose());

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rep.O2);
  rep.singular_values = svd.singularValues();
  const double smax = rep.singular_values.size() ? rep.singular_values(0) : 0.0;
  rep.rank = 0;
  if (smax > 0.0) {
    for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i) {
      if (rep.singular_values(i) > kRankTolerance * smax) ++rep.rank;
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat4> eig(rep.O1, Eigen::EigenvaluesOnly);
  rep.eigenvalues = eig.eigenvalues();
  rep.lambda_min = rep.eigenvalues(0);
  rep.lambda_max = rep.eigenvalues(3);
  rep.observable = rep.rank == 4;
  return rep;
}

ControllabilityReport controllability_gramian(int m1, double t, const Mat2& Q) {
  if (m1 < 1) throw ConfigError("controllability window must be at least 1");
  if (!(std::isfinite(t) && t > 0.0)) throw ConfigError("sampling period must be positive");
  if (!Q.allFinite() || std::abs(Q(0, 1) - Q(1, 0)) > 1e-12 * std::max(1.0, Q.norm())) {
    throw ConfigError("process noise covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat2> qeig(0.5 * (Q + Q.transpose()), Eigen::EigenvaluesOnly);
  if (qeig.eigenvalues()(0) < -kEigenFloor) {
    throw ConfigError("process noise covariance must be positive semidefinite");
  }

  ControllabilityReport rep;
  rep.window = m1;
  const int blocks = m1 + 1;
  rep.H2 = Eigen::MatrixXd::Zero(4, 2 * blocks);
  Eigen::MatrixXd q_hat = Eigen::MatrixXd::Zero(2 * blocks, 2 * blocks);
  for (int m = 0; m < blocks; ++m) {
    const double pos = (2.0 * m + 1.0) / 2.0 * t * t;
    rep.H2.block<2, 2>(0, 2 * m) = pos * Mat2::Identity();
    rep.H2.block<2, 2>(2, 2 * m) = t * Mat2::Identity();
    q_hat.block<2, 2>(2 * m, 2 * m) = Q;
  }
  rep.gramian = rep.H2 * q_hat * rep.H2.transpose();
  rep.gramian = 0.5 * (rep.gramian + rep.gramian.transpose());
  Eigen::SelfAdjointEigenSolver<Mat4> eig(rep.gramian, Eigen::EigenvaluesOnly);
  rep.eigenvalues = eig.eigenvalues();
  rep.positive_definite = rep.eigenvalues(0) > kEigenFloor;
  return rep;
}

CovarianceBounds covariance_bounds(const ObservabilityReport& obs, const ControllabilityReport& ctrl) {
  CovarianceBounds b;
  const double l1 = obs.lambda_min;
  const double l2 = obs.lambda_max;
  const double l3 = ctrl.eigenvalues(0);
  const double l4 = ctrl.eigenvalues(3);
  if (l1 > kEigenFloor) b.upper = 1.0 / l1 + l4;
  if (l3 > kEigenFloor) b.lower = 1.0 / (1.0 / l3 + l2);
  return b;
}

BoundReport theorem_bounds(std::span<const double> est_error_sq, std::span<const double> as_error_sq,
                           double a_hi, double q_check, double t) {
  if (est_error_sq.size() != as_error_sq.size()) {
    throw AnalysisError("error series lengths differ");
  }
  if (est_error_sq.size() < kMinBoundSamples) {
    throw AnalysisError("bound check needs at least 1000 post-transient samples");
  }
  BoundReport rep;
  rep.samples = est_error_sq.size();
  double se = 0.0;
  double sa = 0.0;
  for (std::size_t i = 0; i < rep.samples; ++i) {
    se += est_error_sq[i];
    sa += as_error_sq[i];
  }
  rep.ms_est_error = se / static_cast<double>(rep.samples);
  rep.ms_as_error = sa / static_cast<double>(rep.samples);
  rep.bound = 4.0 * a_hi * rep.ms_est_error + 2.0 * std::pow(t, 4) * q_check;
  rep.holds = rep.ms_as_error <= rep.bound;
  return rep;
}

void AuditReport::merge(const AuditReport& other) {
  min_drone_distance = std::min(min_drone_distance, other.min_drone_distance);
  min_obstacle_distance = std::min(min_obstacle_distance, other.min_obstacle_distance);
  drone_violations += other.drone_violations;
  obstacle_violations += other.obstacle_violations;
  if (other.first_violation && (!first_violation || *other.first_violation < *first_violation)) {
    first_violation = other.first_violation;
  }
}

AuditReport collision_audit(std::span<const std::vector<Vec3>> frames, std::span<const Obstacle> obstacles,
                            double a_tilde, double r_safe) {
  AuditReport rep;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto& xs = frames[k];
    bool violated = false;
    for (std::size_t a = 0; a < xs.size(); ++a) {
      for (std::size_t b = a + 1; b < xs.size(); ++b) {
        const double d = (xs[a] - xs[b]).norm();
        rep.min_drone_distance = std::min(rep.min_drone_distance, d);
        if (d < 2.0 * a_tilde) {
          ++rep.drone_violations;
          violated = true;
        }
      }
      for (const auto& o : obstacles) {
        const double d = (xs[a] - o.position).norm();
        rep.min_obstacle_distance = std::min(rep.min_obstacle_distance, d);
        if (d < r_safe) {
          ++rep.obstacle_violations;
          violated = true;
        }
      }
    }
    if (violated && !rep.first_violation) rep.first_violation = static_cast<long>(k);
  }
  return rep;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw AnalysisError("quantile of an empty sample");
  p = std::clamp(p, 0.0, 1.0);
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace encircle
