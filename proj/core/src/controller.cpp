#include "encircle/controller.hpp"

#include <algorithm>
#include <cmath>

#include "encircle/errors.hpp"

namespace encircle {

void ControllerParams::validate() const {
  const double fields[] = {gamma1, gamma2, r_safe, delta_r, cap, u_max};
  for (double v : fields) {
    if (!(std::isfinite(v) && v > 0.0)) throw ConfigError("controller parameters must be positive");
  }
  if (cap > u_max) throw ConfigError("controller cap must not exceed u_max");
}

namespace {

Vec3 clamp_norm(const Vec3& g, double limit) {
  const double n = g.norm();
  return n > limit ? Vec3(g * (limit / n)) : g;
}

double floored(double denom) {
  if (std::abs(denom) >= kBarrierFloor) return denom;
  return denom < 0.0 ? -kBarrierFloor : kBarrierFloor;
}

}  // namespace

Vec3 attractive_force(Role role, const Vec3& x, const Vec2& s_hat, const Vec2& nu_hat,
                      const Vec2& shape, const SystemMatrices& mats) {
  const double t = mats.t();
  const Vec2 p = ground(x) - s_hat;
  const Vec2 offset = role == Role::kLead ? Vec2(p - shape - t * nu_hat) : Vec2(p + shape - t * nu_hat);
  return lift(-(2.0 / (t * t)) * offset);
}

double action_radius(const Vec2& nu_hat, const ControllerParams& params, const SystemMatrices& mats) {
  return params.r_safe + params.delta_r + (mats.t() * nu_hat).norm();
}

Vec3 interaction_force(const Vec3& x, std::span<const Vec3> neighbors, const ControllerParams& params,
                       double r_bar) {
  const double rs = params.r_safe;
  Vec3 total = Vec3::Zero();
  for (const Vec3& other : neighbors) {
    const Vec3 p = x - other;
    const double d = p.norm();
    if (d < 2.0 * rs || d > 2.0 * r_bar || d == 0.0) continue;
    total += -2.0 * params.gamma1 * rs * p / (floored(2.0 * rs - d) * d * d);
  }
  return clamp_norm(total, params.u_max);
}

Vec3 repulsive_force(const Vec3& x, std::span<const Vec3> obstacles, std::span<const Vec2> targets,
                     const ControllerParams& params, double r_bar) {
  const double rs = params.r_safe;
  Vec3 total = Vec3::Zero();
  auto add = [&](const Vec3& p) {
    const double d = p.norm();
    if (d < rs || d > r_bar || d == 0.0) return;
    total += -params.gamma2 * rs * p / (floored(rs - d) * d * d);
  };
  for (const Vec3& o : obstacles) add(x - o);
  for (const Vec2& s : targets) add(lift(ground(x) - s));
  return clamp_norm(total, params.u_max);
}

Vec3 cap_force(const Vec3& g, double eps) { return eps * g / std::max(eps, g.norm()); }

ForceBreakdown apply_caps(const ForceBreakdown& fb, const ControllerParams& params) {
  ForceBreakdown out = fb;
  const bool in_zero = fb.inter.isZero(0.0);
  const bool re_zero = fb.rep.isZero(0.0);
  const double in_at = fb.inter.dot(fb.at);
  const double re_at = fb.rep.dot(fb.at);
  const double re_in = fb.rep.dot(fb.inter);

  out.inter_cap_applied = in_at >= 0.0 && (re_in >= 0.0 || re_zero);
  out.rep_cap_applied = re_at >= 0.0 && (re_in >= 0.0 || in_zero);
  out.inter_capped = out.inter_cap_applied ? cap_force(fb.inter, params.cap) : fb.inter;
  out.rep_capped = out.rep_cap_applied ? cap_force(fb.rep, params.cap) : fb.rep;
  out.resultant = out.at + out.inter_capped + out.rep_capped;
  return out;
}

Vec3 accel_command(const ForceBreakdown& fb, const Vec3& v, const ControllerParams& params,
                   const SystemMatrices& mats) {
  const Vec3 u = fb.resultant - (2.0 / mats.t()) * v;
  return u.cwiseMax(-params.u_max).cwiseMin(params.u_max);
}

ForceBreakdown compute_forces(const ForceContext& ctx, const ControllerParams& params,
                              const SystemMatrices& mats, bool attractive_only) {
  ForceBreakdown fb;
  fb.at = clamp_norm(attractive_force(ctx.role, ctx.position, ctx.s_hat, ctx.nu_hat, ctx.shape, mats),
                     params.u_max);
  if (!attractive_only) {
    const double r_bar = action_radius(ctx.nu_hat, params, mats);
    fb.inter = interaction_force(ctx.position, ctx.neighbors, params, r_bar);
    fb.rep = repulsive_force(ctx.position, ctx.obstacles, ctx.other_targets, params, r_bar);
  }
  return apply_caps(fb, params);
}

}  // namespace encircle
