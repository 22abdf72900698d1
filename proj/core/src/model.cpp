#include "encircle/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "encircle/errors.hpp"

namespace encircle {

Vec4 TargetState::stacked() const {
  Vec4 eta;
  eta << position, velocity;
  return eta;
}

TargetState TargetState::from_stacked(int id, const Vec4& eta) {
  return TargetState{id, eta.head<2>(), eta.tail<2>()};
}

EigenBounds eigen_bounds(double t) {
  if (!(std::isfinite(t) && t > 0.0)) {
    throw ConfigError("sampling period must be positive, got " + std::to_string(t));
  }
  const double t2 = t * t;
  const double root = t * std::sqrt(4.0 + t2);
  return EigenBounds{(2.0 + t2 - root) / 2.0, (2.0 + t2 + root) / 2.0, t2 * t2 / 4.0 + t2};
}

SystemMatrices::SystemMatrices(double t) : t_(t), bounds_(eigen_bounds(t)) {
  const Eigen::Matrix3d i3 = Eigen::Matrix3d::Identity();
  const Mat2 i2 = Mat2::Identity();

  a3_.setZero();
  a3_.topLeftCorner<3, 3>() = i3;
  a3_.topRightCorner<3, 3>() = t * i3;
  a3_.bottomRightCorner<3, 3>() = i3;
  b3_.topRows<3>() = 0.5 * t * t * i3;
  b3_.bottomRows<3>() = t * i3;

  a2_.setZero();
  a2_.topLeftCorner<2, 2>() = i2;
  a2_.topRightCorner<2, 2>() = t * i2;
  a2_.bottomRightCorner<2, 2>() = i2;
  b2_.topRows<2>() = 0.5 * t * t * i2;
  b2_.bottomRows<2>() = t * i2;

  f_ << 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
}

EigenBounds eigen_bounds(const SystemMatrices& mats) { return eigen_bounds(mats.t()); }

void PresetShape::validate() const {
  if (!(std::isfinite(rho) && rho > 0.0)) {
    throw ConfigError("shape radius rho must be positive");
  }
  if (ell < 4) {
    throw ConfigError("shape period ell must be an integer >= 4, got " + std::to_string(ell));
  }
}

Vec2 preset_shape(long k, const PresetShape& shape) {
  const long period = 2L * shape.ell;
  long r = k % period;
  if (r < 0) r += period;
  const double angle = std::numbers::pi * static_cast<double>(r) / static_cast<double>(shape.ell);
  return shape.rho * Vec2(std::sin(angle), std::cos(angle));
}

DroneState step_drone(const DroneState& state, const Vec3& accel, const SystemMatrices& mats) {
  if (!accel.allFinite() || !state.position.allFinite() || !state.velocity.allFinite()) {
    throw ModelInputError("non-finite drone state or acceleration for drone " +
                          std::to_string(state.id));
  }
  const double t = mats.t();
  DroneState next = state;
  next.position = state.position + t * state.velocity + 0.5 * t * t * accel;
  next.velocity = state.velocity + t * accel;
  return next;
}

TargetState step_target(const TargetState& state, const Vec2& omega, const SystemMatrices& mats) {
  if (!omega.allFinite() || !state.position.allFinite() || !state.velocity.allFinite()) {
    throw ModelInputError("non-finite target state or acceleration for target " +
                          std::to_string(state.id));
  }
  const Vec4 next = mats.A2() * state.stacked() + mats.B2() * omega;
  return TargetState::from_stacked(state.id, next);
}

}  // namespace encircle
