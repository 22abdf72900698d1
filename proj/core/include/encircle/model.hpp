#pragma once

#include <Eigen/Core>

namespace encircle {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using Mat42 = Eigen::Matrix<double, 4, 2>;
using Mat23 = Eigen::Matrix<double, 2, 3>;

/// Tasking drone: double integrator in 3-D.
struct DroneState {
  int id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

/// Ground target: double integrator in the plane driven by random acceleration.
struct TargetState {
  int id = 0;
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();

  /// Stacked state [s; nu].
  Vec4 stacked() const;
  static TargetState from_stacked(int id, const Vec4& eta);
};

/// Static obstacle; its position is fixed once the scenario is loaded.
struct Obstacle {
  int id = 0;
  Vec3 position = Vec3::Zero();
};

struct EigenBounds {
  double a_lo = 0.0;  ///< lambda_min(A3 A3^T)
  double a_hi = 0.0;  ///< lambda_max(A3 A3^T)
  double b_hi = 0.0;  ///< lambda_max(B3 B3^T)
};

/// Closed-form extreme eigenvalues of A3 A3^T and B3 B3^T. Throws ConfigError for t <= 0.
EigenBounds eigen_bounds(double t);

/// Constant system matrices for sampling period t. Immutable after construction.
class SystemMatrices {
 public:
  /// Throws ConfigError unless t is finite and positive.
  explicit SystemMatrices(double t);

  double t() const noexcept { return t_; }
  const Mat6& A3() const noexcept { return a3_; }
  const Mat63& B3() const noexcept { return b3_; }
  const Mat4& A2() const noexcept { return a2_; }
  const Mat42& B2() const noexcept { return b2_; }
  /// Ground-plane projection [[1,0,0],[0,1,0]].
  const Mat23& F() const noexcept { return f_; }
  const EigenBounds& bounds() const noexcept { return bounds_; }

 private:
  double t_;
  Mat6 a3_;
  Mat63 b3_;
  Mat4 a2_;
  Mat42 b2_;
  Mat23 f_;
  EigenBounds bounds_;
};

EigenBounds eigen_bounds(const SystemMatrices& mats);

/// Rotating offset rho * [sin(k pi / ell), cos(k pi / ell)].
struct PresetShape {
  double rho = 0.5;
  int ell = 24;

  double nu_bar() const noexcept { return 1.0 / static_cast<double>(ell); }
  /// Throws ConfigError unless rho > 0 and ell >= 4.
  void validate() const;
};

/// Shape offset at step k. The angle is reduced modulo 2*ell before scaling so the
/// result is exactly periodic in k.
Vec2 preset_shape(long k, const PresetShape& shape);

/// x+ = x + t v + t^2 u / 2, v+ = v + t u. Throws ModelInputError on non-finite input.
DroneState step_drone(const DroneState& state, const Vec3& accel, const SystemMatrices& mats);

/// eta+ = A2 eta + B2 omega. Throws ModelInputError on non-finite input.
TargetState step_target(const TargetState& state, const Vec2& omega, const SystemMatrices& mats);

inline Vec2 ground(const Vec3& x) { return x.head<2>(); }
inline Vec3 lift(const Vec2& p) { return Vec3(p.x(), p.y(), 0.0); }

}  // namespace encircle
