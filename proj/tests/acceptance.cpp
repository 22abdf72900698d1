// Acceptance driver. Prints one PASS/FAIL line per criterion with the measured values.
// Usage: encircle_acceptance [--criterion N]...
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "encircle/analysis.hpp"
#include "encircle/assignment.hpp"
#include "encircle/errors.hpp"
#include "encircle/estimator.hpp"
#include "encircle/log_io.hpp"
#include "encircle/rng.hpp"
#include "encircle/runner.hpp"
#include "encircle/scenario.hpp"
#include "encircle/sensing.hpp"
#include "oracles.hpp"

using namespace encircle;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared 20-seed batch for the statistical criteria.
struct Batch {
  MonteCarloReport report;
  double seconds = 0.0;
};

const Batch& golden_batch() {
  static const Batch batch = [] {
    std::vector<std::uint64_t> seeds(20);
    std::iota(seeds.begin(), seeds.end(), 1);
    const auto start = Clock::now();
    Batch b;
    b.report = run_monte_carlo(golden_scenario(), seeds, 0);
    b.seconds = seconds_since(start);
    return b;
  }();
  return batch;
}

Outcome deadbeat() {
  ScenarioConfig cfg = golden_scenario();
  cfg.flags.noise = false;
  cfg.flags.perfect_estimate = true;
  cfg.flags.attractive_only = true;
  const auto start = Clock::now();
  const RunResult r = run_scenario(cfg);
  const double secs = seconds_since(start);
  const double worst = r.summary.max_as_error_after_first;
  return {worst <= 1e-9 && secs < 1.0, fmt("max |e_bar| over k>=1 = %.3e m, runtime %.3f s", worst, secs)};
}

Outcome estimation_band() {
  const Batch& b = golden_batch();
  bool pass = b.report.failed == 0 && b.seconds < 60.0;
  std::string detail;
  for (const auto& t : b.report.targets) {
    pass = pass && t.occupancy >= 0.9;
    detail += fmt("target %d occupancy %.3f (median |e_s| %.2f m); ", t.target, t.occupancy,
                  t.pos_error_quantiles.empty() ? NAN : t.pos_error_quantiles[0]);
  }
  detail += fmt("failed seeds %zu, runtime %.2f s", b.report.failed, b.seconds);
  return {pass, detail};
}

Outcome mean_square_bound() {
  const Batch& b = golden_batch();
  bool pass = b.report.failed == 0;
  std::string detail;
  for (const auto& t : b.report.targets) {
    pass = pass && t.bound_evaluated && t.bound.holds;
    detail += fmt("target %d E|e_bar|^2 %.4f <= %.4f; ", t.target, t.bound.ms_as_error, t.bound.bound);
  }
  return {pass, detail};
}

Outcome variance_estimator() {
  struct Geometry {
    double di, dg, qi, qg;
  };
  const Geometry geoms[] = {{1.0, 1.2, 0.005, 0.005}, {2.5, 0.6, 0.005, 0.01}, {4.0, 3.0, 0.02, 0.005}};
  const int draws = 100000;
  const auto start = Clock::now();
  bool pass = true;
  std::string detail;
  for (std::size_t gi = 0; gi < std::size(geoms); ++gi) {
    const Geometry& g = geoms[gi];
    const DroneState di{0, Vec3(g.di, 0.0, 2.0), Vec3::Zero()};
    const DroneState dg{1, Vec3(-g.dg, 0.0, 2.0), Vec3::Zero()};
    const TargetState target{0, Vec2::Zero(), Vec2::Zero()};
    SensorConfig si;
    si.q = g.qi;
    SensorConfig sg;
    sg.q = g.qg;
    const double theta0 = g.di * g.di - g.dg * g.dg - g.di * g.di + g.dg * g.dg;
    double sum = 0.0;
    double sum_sq = 0.0;
    double sum_var = 0.0;
    for (int n = 0; n < draws; ++n) {
      NoiseStream ni = range_stream(77 + gi, 0, 0, n);
      NoiseStream ng = range_stream(77 + gi, 1, 0, n);
      const auto bi = measure_batch(di, target, si, ni, n);
      const auto bg = measure_batch(dg, target, sg, ng, n);
      const MeasurementRecord m = build_measurement(*bi, *bg, di.position, dg.position, g.qi, g.qg);
      const double e = m.theta - theta0;
      sum += e;
      sum_sq += e * e;
      sum_var += m.var_hat;
    }
    const double mean = sum / draws;
    const double var = sum_sq / draws - mean * mean;
    const double model = sum_var / draws;
    const double rel = std::abs(var / model - 1.0);
    const double se = std::sqrt(var / draws);
    const double z = std::abs(mean - (g.qi - g.qg)) / se;
    pass = pass && rel <= 0.05 && z <= 3.0;
    detail += fmt("geometry %zu: var %.5f vs model %.5f (rel %.3f), mean z %.2f; ", gi, var, model, rel, z);
  }
  const double secs = seconds_since(start);
  pass = pass && secs < 10.0;
  detail += fmt("runtime %.2f s", secs);
  return {pass, detail};
}

Outcome kalman_oracle() {
  const ScenarioConfig cfg = golden_scenario();
  const RunResult r = run_scenario(cfg);
  const double q = cfg.sensor.q;
  double worst = 0.0;
  double min_eig = INFINITY;
  long compared = 0;
  long updates = 0;
  for (std::size_t j = 0; j < cfg.targets.size(); ++j) {
    const Mat2& Q = cfg.targets[j].Q;
    oracle::ReferenceKalman ref{cfg.t, Q(0, 0), Q(0, 1), Q(1, 1)};
    const EstimateRecord& e0 = r.log[0].estimates[j];
    for (int i = 0; i < 4; ++i) {
      ref.x[static_cast<std::size_t>(i)] = e0.eta_hat(i);
      for (int c = 0; c < 4; ++c) ref.P[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = cfg.zeta0(i, c);
    }
    for (std::size_t k = 1; k <= 200; ++k) {
      const EstimateRecord& e = r.log[k].estimates[j];
      if (e.updated) {
        const Vec2 p = e.relative_position;
        ref.step(e.theta, {-2.0 * p.x(), -2.0 * p.y(), 0.0, 0.0}, e.var_hat, q - q);
        ++updates;
      } else {
        ref.step(0.0, {0.0, 0.0, 0.0, 0.0}, 1.0, 0.0);
      }
      for (int i = 0; i < 4; ++i) {
        worst = std::max(worst, std::abs(ref.x[static_cast<std::size_t>(i)] - e.eta_hat(i)));
      }
      min_eig = std::min(min_eig, e.zeta_min_eig);
      ++compared;
    }
  }
  return {worst <= 1e-9 && min_eig > 0.0,
          fmt("%ld steps (%ld updates), max |eta_hat - reference| %.3e, min eig(zeta) %.3e", compared, updates, worst,
              min_eig)};
}

Outcome observability() {
  const SystemMatrices mats(0.8);
  long on_shape = 0;
  long on_shape_full = 0;
  for (long k0 = 0; k0 < 48; ++k0) {
    for (int n : {4, 8, 30}) {
      std::vector<WindowSample> w;
      for (long k = k0; k < k0 + n; ++k) w.push_back({2.0 * preset_shape(k, PresetShape{}), 0.04});
      const ObservabilityReport rep = observability_gramian(w, mats);
      ++on_shape;
      on_shape_full += rep.observable && rep.lambda_min > 0.0;
    }
  }

  // Force-free stretches of a golden run whose pairs track the true target, so the
  // measurement baselines follow the preset shape.
  ScenarioConfig cfg = golden_scenario();
  cfg.flags.perfect_estimate = true;
  long run_windows = 0;
  long run_full = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RunResult r = run_scenario(cfg, seed);
    for (std::size_t j = 0; j < cfg.targets.size(); ++j) {
      std::vector<WindowSample> stretch;
      for (const auto& rec : r.log) {
        const EstimateRecord& e = rec.estimates[j];
        if (!(rec.force_free[j] && e.updated)) {
          stretch.clear();
          continue;
        }
        stretch.push_back({e.relative_position, e.var_hat});
        if (stretch.size() < 4) continue;
        const std::size_t n = std::min<std::size_t>(stretch.size(), static_cast<std::size_t>(cfg.window));
        const ObservabilityReport rep = observability_gramian(std::span(stretch).subspan(stretch.size() - n), mats);
        ++run_windows;
        run_full += rep.observable && rep.lambda_min > 0.0;
      }
    }
  }

  long collinear = 0;
  long collinear_flagged = 0;
  for (int a = 0; a < 12; ++a) {
    const Vec2 dir(std::cos(0.5 * a), std::sin(0.5 * a));
    std::vector<WindowSample> w;
    for (int k = 0; k < 10; ++k) w.push_back({(0.5 + 0.1 * k) * dir, 0.04});
    ++collinear;
    collinear_flagged += !observability_gramian(w, mats).observable;
  }
  const bool pass = on_shape_full == on_shape && run_full == run_windows && run_windows > 0 &&
                    collinear_flagged == collinear;
  return {pass, fmt("synthetic on-shape %ld/%ld rank 4, tracked-shape force-free windows %ld/%ld rank 4, "
                    "collinear %ld/%ld flagged",
                    on_shape_full, on_shape, run_full, run_windows, collinear_flagged, collinear)};
}

AssignmentProblem problem_from(const ScenarioConfig& cfg) {
  AssignmentProblem p;
  p.num_drones = static_cast<int>(cfg.drones.size());
  p.num_targets = static_cast<int>(cfg.targets.size());
  for (const auto& d : cfg.drones) {
    std::vector<std::optional<double>> row;
    for (const auto& t : cfg.targets) {
      const double dist = ground_distance(d.position, t.initial.position);
      row.push_back(dist <= cfg.sensor.r2 ? std::optional<double>(dist) : std::nullopt);
    }
    p.distances.push_back(row);
    p.neighbors.push_back(neighbor_set(d, cfg.drones, cfg.sensor));
  }
  return p;
}

Outcome assignment() {
  const ScenarioConfig cfg = golden_scenario();
  const AssignmentProblem p = problem_from(cfg);
  const AssignmentResult r = run_assignment(p, {});
  const int cap = 10 * p.num_drones;

  std::vector<std::vector<bool>> visible;
  for (const auto& row : p.distances) {
    std::vector<bool> v;
    for (const auto& d : row) v.push_back(d.has_value());
    visible.push_back(v);
  }
  std::vector<int> choice(static_cast<std::size_t>(p.num_drones), -1);
  bool distinct = r.pairs.size() == cfg.targets.size();
  for (const auto& pair : r.pairs) {
    distinct = distinct && pair.lead != pair.trail;
    choice[static_cast<std::size_t>(pair.lead)] = pair.target;
    choice[static_cast<std::size_t>(pair.trail)] = pair.target;
  }
  bool feasible = false;
  const auto matchings = oracle::feasible_matchings(visible);
  for (const auto& m : matchings) feasible = feasible || m == choice;

  int minimal_ok = 0;
  const int minimal_cases = 20;
  for (int c = 0; c < minimal_cases; ++c) {
    AssignmentProblem m;
    m.num_drones = 2;
    m.num_targets = 1;
    m.distances = {{0.5 + 0.2 * c}, {1.0 + 0.1 * c}};
    m.neighbors = {{1}, {0}};
    const AssignmentResult mr = run_assignment(m, {});
    minimal_ok += mr.rounds == 1 && mr.pairs.size() == 1;
  }
  const bool pass = r.rounds <= cap && distinct && feasible && minimal_ok == minimal_cases;
  std::string pairs;
  for (const auto& pair : r.pairs) pairs += fmt("T%d{%d,%d} ", pair.target, pair.lead, pair.trail);
  return {pass, fmt("golden: %d rounds (cap %d), %s; oracle feasible set %zu, in set: %s; minimal 1-round %d/%d",
                    r.rounds, cap, pairs.c_str(), matchings.size(), feasible ? "yes" : "no", minimal_ok,
                    minimal_cases)};
}

Outcome audit_batch() {
  const Batch& b = golden_batch();
  const AuditReport& a = b.report.audit;
  return {b.report.failed == 0 && a.clean(),
          fmt("drone-drone violations %ld (min %.3f m, limit %.2f), drone-obstacle violations %ld (min %.3f m, "
              "limit %.2f)",
              a.drone_violations, a.min_drone_distance, 2 * golden_scenario().a_tilde, a.obstacle_violations,
              a.min_obstacle_distance, golden_scenario().a_tilde + golden_scenario().b_tilde)};
}

Outcome determinism() {
  const ScenarioConfig cfg = golden_scenario();
  const RunResult a = run_scenario(cfg, 9);
  const RunResult b = run_scenario(cfg, 9);
  const std::uint64_t recomputed = log_hash(a.log);
  const bool pass = a.summary.log_hash == b.summary.log_hash && recomputed == a.summary.log_hash;
  return {pass, fmt("hash %s vs %s", hex64(a.summary.log_hash).c_str(), hex64(b.summary.log_hash).c_str())};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "deadbeat", deadbeat},
      {2, "estimation_band", estimation_band},
      {3, "mean_square_bound", mean_square_bound},
      {4, "variance_estimator", variance_estimator},
      {5, "kalman_oracle", kalman_oracle},
      {6, "observability", observability},
      {7, "assignment", assignment},
      {8, "collision_audit", audit_batch},
      {9, "determinism", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 2;
    }
  }
  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome o;
    try {
      o = c.check();
    } catch (const Error& e) {
      o = {false, fmt("error %s: %s", e.code().c_str(), e.what())};
    }
    failures += !o.pass;
    std::printf("%s criterion %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
