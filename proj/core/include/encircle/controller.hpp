#pragma once

#include <span>
#include <vector>

#include "encircle/model.hpp"

namespace encircle {

struct ControllerParams {
  double gamma1 = 0.05;   ///< interaction coefficient
  double gamma2 = 0.005;  ///< repulsion coefficient
  double r_safe = 0.2;    ///< safety radius r~ = a~ + b~, m
  double delta_r = 0.1;   ///< action-radius margin, m
  double cap = 1.0;       ///< angle-conditioned cap on interaction/repulsion, m/s^2
  double u_max = 50.0;    ///< actuator saturation, m/s^2

  /// Throws ConfigError unless every field is positive and cap <= u_max.
  void validate() const;
};

/// The lead drone (lower id of the pair) tracks s + P, the trail drone s - P.
enum class Role { kLead, kTrail };

struct ForceBreakdown {
  Vec3 at = Vec3::Zero();
  Vec3 inter = Vec3::Zero();
  Vec3 rep = Vec3::Zero();
  Vec3 inter_capped = Vec3::Zero();
  Vec3 rep_capped = Vec3::Zero();
  Vec3 resultant = Vec3::Zero();
  bool inter_cap_applied = false;
  bool rep_cap_applied = false;
};

/// Floor on the magnitude of barrier denominators.
inline constexpr double kBarrierFloor = 1e-6;

/// Lead: -(2/t^2) F^T (p - P - t nu_hat); trail: -(2/t^2) F^T (p + P - t nu_hat),
/// with p = F x - s_hat. The z component is always zero.
Vec3 attractive_force(Role role, const Vec3& x, const Vec2& s_hat, const Vec2& nu_hat,
                      const Vec2& shape, const SystemMatrices& mats);

/// r~ + delta_r + |t nu_hat|.
double action_radius(const Vec2& nu_hat, const ControllerParams& params, const SystemMatrices& mats);

/// Sum over neighbours of -2 gamma1 r~ p / ((2r~ - d) d^2) for d in [2r~, 2 r_bar],
/// p = x - x_neighbour in 3-D. Result norm clamped at u_max.
Vec3 interaction_force(const Vec3& x, std::span<const Vec3> neighbors, const ControllerParams& params,
                       double r_bar);

/// Sum of -gamma2 r~ p / ((r~ - d) d^2) for d in [r~, r_bar]. Obstacles use 3-D offsets;
/// targets use ground-plane offsets embedded with F^T. Result norm clamped at u_max.
Vec3 repulsive_force(const Vec3& x, std::span<const Vec3> obstacles, std::span<const Vec2> targets,
                     const ControllerParams& params, double r_bar);

/// eps * g / max(eps, |g|).
Vec3 cap_force(const Vec3& g, double eps);

/// Caps inter when inter.at >= 0 and (rep.inter >= 0 or rep = 0); caps rep symmetrically.
/// Dot products of zero vectors count as non-negative.
ForceBreakdown apply_caps(const ForceBreakdown& fb, const ControllerParams& params);

/// u = resultant - (2/t) v, saturated componentwise at u_max.
Vec3 accel_command(const ForceBreakdown& fb, const Vec3& v, const ControllerParams& params,
                   const SystemMatrices& mats);

/// Everything one drone needs for its command at step k.
struct ForceContext {
  Role role = Role::kLead;
  Vec3 position = Vec3::Zero();
  Vec2 s_hat = Vec2::Zero();
  Vec2 nu_hat = Vec2::Zero();
  Vec2 shape = Vec2::Zero();
  std::vector<Vec3> neighbors;
  std::vector<Vec3> obstacles;
  std::vector<Vec2> other_targets;  ///< estimated positions, own target excluded
};

/// Attractive, interaction and repulsive forces with caps applied.
/// With `attractive_only` the other two terms are left at zero.
ForceBreakdown compute_forces(const ForceContext& ctx, const ControllerParams& params,
                              const SystemMatrices& mats, bool attractive_only = false);

}  // namespace encircle
