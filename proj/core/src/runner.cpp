#include "encircle/runner.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "encircle/errors.hpp"
#include "encircle/log_io.hpp"
#include "encircle/rng.hpp"
#include "encircle/sensing.hpp"

namespace encircle {

namespace {

struct PairSlot {
  int target = -1;
  Role role = Role::kLead;
};

Mat2 covariance_root(const Mat2& Q) {
  Eigen::SelfAdjointEigenSolver<Mat2> eig(0.5 * (Q + Q.transpose()));
  const Vec2 roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal();
}

Vec2 draw_omega(const TargetSpec& spec, const Mat2& root, bool noise, std::uint64_t seed, long k) {
  if (!spec.scripted_omega.empty()) return spec.scripted_omega[static_cast<std::size_t>(k)];
  if (!noise) return Vec2::Zero();
  NoiseStream stream = target_accel_stream(seed, spec.initial.id, k);
  const double a = stream.gaussian();
  const double b = stream.gaussian();
  return root * Vec2(a, b);
}

EstimateRecord describe(int target, const EstimatorState& est) {
  EstimateRecord rec;
  rec.target = target;
  rec.eta_hat = est.eta_hat;
  rec.zeta_trace = est.zeta.trace();
  Eigen::SelfAdjointEigenSolver<Mat4> eig(est.zeta, Eigen::EigenvaluesOnly);
  rec.zeta_min_eig = eig.eigenvalues()(0);
  rec.zeta_max_eig = eig.eigenvalues()(3);
  return rec;
}

RunSummary summarize(const ScenarioConfig& cfg, std::uint64_t seed, const std::vector<StepRecord>& log,
                     const AssignmentResult& assignment) {
  RunSummary sum;
  sum.seed = seed;
  sum.steps = static_cast<long>(log.size());
  sum.transient = cfg.transient;
  sum.pairs = assignment.pairs;
  sum.assignment_rounds = assignment.rounds;

  const std::size_t m = cfg.targets.size();
  sum.targets.resize(m);
  std::vector<long> streak(m, 0);
  for (std::size_t j = 0; j < m; ++j) {
    sum.targets[j].target = static_cast<int>(j);
    sum.targets[j].min_zeta_eig = std::numeric_limits<double>::infinity();
  }

  std::vector<std::vector<Vec3>> frames;
  frames.reserve(log.size());
  for (const auto& rec : log) {
    std::vector<Vec3> xs;
    for (std::size_t i = 0; i < rec.drones.size(); ++i) {
      xs.push_back(rec.drones[i].position);
      sum.max_z_drift =
          std::max(sum.max_z_drift, std::abs(rec.drones[i].position.z() - log.front().drones[i].position.z()));
    }
    frames.push_back(std::move(xs));

    for (const auto& tm : rec.metrics.targets) {
      auto& ts = sum.targets[static_cast<std::size_t>(tm.target)];
      if (rec.k >= 1) sum.max_as_error_after_first = std::max(sum.max_as_error_after_first, tm.as_error_norm);
      if (rec.k >= cfg.transient) {
        ts.pos_error.push_back(tm.pos_error_norm);
        ts.est_error_sq.push_back(tm.est_error_norm * tm.est_error_norm);
        ts.as_error.push_back(tm.as_error_norm);
      }
    }
    for (const auto& er : rec.estimates) {
      auto& ts = sum.targets[static_cast<std::size_t>(er.target)];
      if (er.clamped) ++ts.clamp_events;
      ts.min_zeta_eig = std::min(ts.min_zeta_eig, er.zeta_min_eig);
      if (er.zeta_min_eig > 0.0) {
        ts.max_zeta_condition = std::max(ts.max_zeta_condition, er.zeta_max_eig / er.zeta_min_eig);
      }
      if (er.updated) sum.max_pair_outer = std::max(sum.max_pair_outer, er.relative_position.squaredNorm());
    }
    for (std::size_t j = 0; j < m && j < rec.force_free.size(); ++j) {
      streak[j] = rec.force_free[j] ? streak[j] + 1 : 0;
      sum.targets[j].longest_force_free = std::max(sum.targets[j].longest_force_free, streak[j]);
    }
  }

  for (auto& ts : sum.targets) {
    if (!ts.pos_error.empty()) {
      const auto inside = std::count_if(ts.pos_error.begin(), ts.pos_error.end(),
                                        [](double e) { return e <= kOccupancyBand; });
      ts.occupancy = static_cast<double>(inside) / static_cast<double>(ts.pos_error.size());
      double se = 0.0;
      double sa = 0.0;
      for (std::size_t n = 0; n < ts.pos_error.size(); ++n) {
        se += ts.est_error_sq[n];
        sa += ts.as_error[n] * ts.as_error[n];
      }
      ts.ms_est_error = se / static_cast<double>(ts.pos_error.size());
      ts.ms_as_error = sa / static_cast<double>(ts.pos_error.size());
    }
  }

  sum.audit = collision_audit(frames, cfg.obstacles, cfg.a_tilde, cfg.controller.r_safe);
  sum.log_hash = log_hash(log);
  return sum;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, std::optional<std::uint64_t> seed_override) {
  cfg.validate();
  const std::uint64_t seed = seed_override.value_or(cfg.seed);
  const SystemMatrices mats(cfg.t);
  const std::size_t n = cfg.drones.size();
  const std::size_t m = cfg.targets.size();

  std::vector<DroneState> drones = cfg.drones;
  std::vector<TargetState> targets;
  std::vector<Mat2> roots;
  for (const auto& spec : cfg.targets) {
    targets.push_back(spec.initial);
    roots.push_back(covariance_root(spec.Q));
  }

  SensorConfig sense = cfg.sensor;
  if (!cfg.flags.noise) sense.q = 0.0;
  const double q = cfg.sensor.q;

  RunResult result;
  std::vector<EstimatorState> filters(m);
  std::vector<PairSlot> slot(n);
  std::vector<AssignedPair> pairs;

  long k = 0;
  try {
    for (k = 0; k < cfg.steps; ++k) {
      StepRecord rec;
      rec.k = k;
      rec.drones = drones;
      rec.targets = targets;

      // Sensing.
      std::vector<std::vector<std::optional<RangeBatch>>> batches(n, std::vector<std::optional<RangeBatch>>(m));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          NoiseStream stream = range_stream(seed, static_cast<int>(i), static_cast<int>(j), k);
          batches[i][j] = measure_batch(drones[i], targets[j], sense, stream, k);
        }
      }
      std::vector<std::vector<int>> neighbors(n);
      for (std::size_t i = 0; i < n; ++i) neighbors[i] = neighbor_set(drones[i], drones, cfg.sensor);

      // Assignment, initial phase only.
      if (k == 0) {
        AssignmentProblem problem;
        problem.num_drones = static_cast<int>(n);
        problem.num_targets = static_cast<int>(m);
        problem.neighbors = neighbors;
        for (std::size_t i = 0; i < n; ++i) {
          std::vector<std::optional<double>> row(m);
          for (std::size_t j = 0; j < m; ++j) {
            if (batches[i][j]) row[j] = batches[i][j]->mean();
          }
          problem.distances.push_back(row);
        }
        result.assignment = run_assignment(problem, AssignmentConfig{cfg.eps_tilde, 0});
        pairs = result.assignment.pairs;
        for (const auto& p : pairs) {
          slot[static_cast<std::size_t>(p.lead)] = PairSlot{p.target, Role::kLead};
          slot[static_cast<std::size_t>(p.trail)] = PairSlot{p.target, Role::kTrail};
        }
      }
      rec.pairs = pairs;

      // Estimation.
      std::vector<Vec4> eta_hat(m, Vec4::Zero());
      for (const auto& p : pairs) {
        const auto j = static_cast<std::size_t>(p.target);
        const auto li = static_cast<std::size_t>(p.lead);
        const auto gi = static_cast<std::size_t>(p.trail);
        const auto& bi = batches[li][j];
        const auto& bg = batches[gi][j];
        EstimateRecord er;
        if (k == 0) {
          filters[j] = init_estimator(*bi, *bg, drones[li].position, drones[gi].position, cfg.zeta0);
          er = describe(p.target, filters[j]);
        } else if (bi && bg) {
          const MeasurementRecord meas = build_measurement(*bi, *bg, drones[li].position, drones[gi].position, q, q);
          filters[j] = dtse_update(filters[j], meas, cfg.targets[j].Q, mats);
          er = describe(p.target, filters[j]);
          er.theta = meas.theta;
          er.var_hat = meas.var_hat;
          er.relative_position = meas.relative_position;
          er.clamped = meas.clamped;
          er.degenerate = meas.degenerate;
          er.updated = !meas.degenerate;
        } else {
          filters[j] = dtse_predict(filters[j], cfg.targets[j].Q, mats);
          er = describe(p.target, filters[j]);
        }
        if (!(er.zeta_min_eig > 0.0)) throw NumericalError("covariance lost positive definiteness");
        eta_hat[j] = cfg.flags.perfect_estimate ? targets[j].stacked() : filters[j].eta_hat;
        rec.estimates.push_back(er);
      }

      // Forces and commands.
      const Vec2 shape = preset_shape(k, cfg.shape);
      std::vector<Vec3> commands(n, Vec3::Zero());
      std::vector<bool> quiet(n, true);
      for (std::size_t i = 0; i < n; ++i) {
        const PairSlot& s = slot[i];
        const auto j = static_cast<std::size_t>(s.target);
        const AssignedPair& pair = pairs[j];
        const auto partner = static_cast<std::size_t>(s.role == Role::kLead ? pair.trail : pair.lead);

        ForceContext ctx;
        ctx.role = s.role;
        ctx.position = drones[i].position;
        ctx.s_hat = eta_hat[j].head<2>();
        ctx.nu_hat = eta_hat[j].tail<2>();
        ctx.shape = shape;
        for (int g : neighbors[i]) ctx.neighbors.push_back(drones[static_cast<std::size_t>(g)].position);
        for (int o : visible_obstacles(drones[i], cfg.obstacles, cfg.sensor)) {
          ctx.obstacles.push_back(cfg.obstacles[static_cast<std::size_t>(o)].position);
        }
        for (std::size_t h = 0; h < m; ++h) {
          if (h == j || !batches[i][h] || !batches[partner][h]) continue;
          ctx.other_targets.push_back(eta_hat[h].head<2>());
        }

        DroneForceRecord fr;
        fr.drone = static_cast<int>(i);
        fr.forces = compute_forces(ctx, cfg.controller, mats, cfg.flags.attractive_only);
        fr.command = accel_command(fr.forces, drones[i].velocity, cfg.controller, mats);
        quiet[i] = fr.forces.inter_capped.isZero(0.0) && fr.forces.rep_capped.isZero(0.0);
        commands[i] = fr.command;
        rec.forces.push_back(fr);
      }
      rec.force_free.assign(m, false);
      for (const auto& p : pairs) {
        rec.force_free[static_cast<std::size_t>(p.target)] =
            quiet[static_cast<std::size_t>(p.lead)] && quiet[static_cast<std::size_t>(p.trail)];
      }

      rec.metrics = compute_metrics(k, drones, targets, eta_hat, pairs, cfg.obstacles);

      // World step.
      for (std::size_t j = 0; j < m; ++j) {
        const Vec2 omega = draw_omega(cfg.targets[j], roots[j], cfg.flags.noise, seed, k);
        rec.omega.push_back(omega);
        targets[j] = step_target(targets[j], omega, mats);
      }
      for (std::size_t i = 0; i < n; ++i) drones[i] = step_drone(drones[i], commands[i], mats);

      result.log.push_back(std::move(rec));
    }
  } catch (const RunError&) {
    throw;
  } catch (const Error& e) {
    throw RunError(k, e.code(), e.what());
  }

  result.summary = summarize(cfg, seed, result.log, result.assignment);
  return result;
}

std::vector<PooledTarget> pool_targets(std::span<const RunSummary> summaries, double a_hi, double q_check,
                                       double t) {
  std::vector<PooledTarget> pooled;
  if (summaries.empty()) return pooled;
  const std::size_t m = summaries.front().targets.size();
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> pos;
    std::vector<double> est_sq;
    std::vector<double> as;
    std::vector<double> as_sq;
    for (const auto& s : summaries) {
      const auto& ts = s.targets[j];
      pos.insert(pos.end(), ts.pos_error.begin(), ts.pos_error.end());
      est_sq.insert(est_sq.end(), ts.est_error_sq.begin(), ts.est_error_sq.end());
      as.insert(as.end(), ts.as_error.begin(), ts.as_error.end());
    }
    for (double e : as) as_sq.push_back(e * e);

    PooledTarget pt;
    pt.target = static_cast<int>(j);
    pt.samples = pos.size();
    if (!pos.empty()) {
      const auto inside = std::count_if(pos.begin(), pos.end(), [](double e) { return e <= kOccupancyBand; });
      pt.occupancy = static_cast<double>(inside) / static_cast<double>(pos.size());
      double se = 0.0;
      double sa = 0.0;
      for (std::size_t i = 0; i < pos.size(); ++i) {
        se += est_sq[i];
        sa += as_sq[i];
      }
      pt.ms_est_error = se / static_cast<double>(pos.size());
      pt.ms_as_error = sa / static_cast<double>(pos.size());
      for (double p : kReportQuantiles) {
        pt.pos_error_quantiles.push_back(quantile(pos, p));
        pt.as_error_quantiles.push_back(quantile(as, p));
      }
    }
    if (pos.size() >= kMinBoundSamples) {
      pt.bound = theorem_bounds(est_sq, as_sq, a_hi, q_check, t);
      pt.bound_evaluated = true;
    }
    pooled.push_back(std::move(pt));
  }
  return pooled;
}

MonteCarloReport run_monte_carlo(const ScenarioConfig& cfg, std::span<const std::uint64_t> seeds,
                                 unsigned workers) {
  if (seeds.empty()) throw ArgumentError("Monte-Carlo batch needs at least one seed");
  cfg.validate();

  MonteCarloReport report;
  report.runs.resize(seeds.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t idx = next++; idx < seeds.size(); idx = next++) {
      SeedOutcome& out = report.runs[idx];
      out.seed = seeds[idx];
      try {
        RunResult run = run_scenario(cfg, seeds[idx]);
        out.summary = std::move(run.summary);
      } catch (const RunError& e) {
        out.error_code = e.cause();
        out.error_message = e.what();
        out.error_step = e.step();
      } catch (const Error& e) {
        out.error_code = e.code();
        out.error_message = e.what();
      }
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(seeds.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::vector<RunSummary> ok;
  for (const auto& r : report.runs) {
    if (r.summary) {
      ok.push_back(*r.summary);
      report.audit.merge(r.summary->audit);
    } else {
      ++report.failed;
    }
  }
  double q_check = 0.0;
  for (const auto& spec : cfg.targets) {
    Eigen::SelfAdjointEigenSolver<Mat2> eig(spec.Q, Eigen::EigenvaluesOnly);
    q_check = std::max(q_check, eig.eigenvalues()(1));
  }
  report.targets = pool_targets(ok, eigen_bounds(cfg.t).a_hi, q_check, cfg.t);
  return report;
}

}  // namespace encircle
