#include "encircle/log_io.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

#include "encircle/errors.hpp"

namespace encircle {

using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

namespace {

template <typename V>
json vec(const V& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <int N>
Eigen::Matrix<double, N, 1> read(const json& j) {
  if (!j.is_array() || j.size() != N) throw ArgumentError("log vector has the wrong length");
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json distance(double d) { return std::isfinite(d) ? json(d) : json(nullptr); }

double read_distance(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json force_json(const DroneForceRecord& fr) {
  const ForceBreakdown& f = fr.forces;
  return {{"drone", fr.drone},
          {"at", vec(f.at)},
          {"inter", vec(f.inter)},
          {"rep", vec(f.rep)},
          {"inter_capped", vec(f.inter_capped)},
          {"rep_capped", vec(f.rep_capped)},
          {"inter_cap", f.inter_cap_applied},
          {"rep_cap", f.rep_cap_applied},
          {"resultant", vec(f.resultant)},
          {"u", vec(fr.command)}};
}

}  // namespace

std::string step_to_json_line(const StepRecord& rec) {
  json j;
  j["k"] = rec.k;
  j["drones"] = json::array();
  for (const auto& d : rec.drones) {
    j["drones"].push_back({{"id", d.id}, {"x", vec(d.position)}, {"v", vec(d.velocity)}});
  }
  j["targets"] = json::array();
  for (const auto& t : rec.targets) {
    j["targets"].push_back({{"id", t.id}, {"s", vec(t.position)}, {"nu", vec(t.velocity)}});
  }
  j["omega"] = json::array();
  for (const auto& w : rec.omega) j["omega"].push_back(vec(w));
  j["pairs"] = json::array();
  for (const auto& p : rec.pairs) j["pairs"].push_back({{"target", p.target}, {"lead", p.lead}, {"trail", p.trail}});
  j["estimates"] = json::array();
  for (const auto& e : rec.estimates) {
    j["estimates"].push_back({{"target", e.target},
                              {"eta_hat", vec(e.eta_hat)},
                              {"zeta_trace", e.zeta_trace},
                              {"zeta_min_eig", e.zeta_min_eig},
                              {"zeta_max_eig", e.zeta_max_eig},
                              {"theta", e.theta},
                              {"var_hat", e.var_hat},
                              {"rel", vec(e.relative_position)},
                              {"updated", e.updated},
                              {"clamped", e.clamped},
                              {"degenerate", e.degenerate}});
  }
  j["forces"] = json::array();
  for (const auto& f : rec.forces) j["forces"].push_back(force_json(f));
  json metrics;
  metrics["targets"] = json::array();
  for (const auto& t : rec.metrics.targets) {
    metrics["targets"].push_back({{"target", t.target},
                                  {"e", vec(t.est_error)},
                                  {"e_norm", t.est_error_norm},
                                  {"pos_err", t.pos_error_norm},
                                  {"as_err", vec(t.as_error)},
                                  {"as_norm", t.as_error_norm}});
  }
  metrics["min_drone_distance"] = distance(rec.metrics.min_drone_distance);
  metrics["min_obstacle_distance"] = distance(rec.metrics.min_obstacle_distance);
  j["metrics"] = metrics;
  j["force_free"] = rec.force_free;
  return j.dump();
}

StepRecord step_from_json_line(const std::string& line) {
  try {
    const json j = json::parse(line);
    StepRecord rec;
    rec.k = j.at("k").get<long>();
    for (const auto& d : j.at("drones")) {
      rec.drones.push_back(DroneState{d.at("id").get<int>(), read<3>(d.at("x")), read<3>(d.at("v"))});
    }
    for (const auto& t : j.at("targets")) {
      rec.targets.push_back(TargetState{t.at("id").get<int>(), read<2>(t.at("s")), read<2>(t.at("nu"))});
    }
    for (const auto& w : j.at("omega")) rec.omega.push_back(read<2>(w));
    for (const auto& p : j.at("pairs")) {
      rec.pairs.push_back(AssignedPair{p.at("target").get<int>(), p.at("lead").get<int>(), p.at("trail").get<int>()});
    }
    for (const auto& e : j.at("estimates")) {
      EstimateRecord er;
      er.target = e.at("target").get<int>();
      er.eta_hat = read<4>(e.at("eta_hat"));
      er.zeta_trace = e.at("zeta_trace").get<double>();
      er.zeta_min_eig = e.at("zeta_min_eig").get<double>();
      er.zeta_max_eig = e.at("zeta_max_eig").get<double>();
      er.theta = e.at("theta").get<double>();
      er.var_hat = e.at("var_hat").get<double>();
      er.relative_position = read<2>(e.at("rel"));
      er.updated = e.at("updated").get<bool>();
      er.clamped = e.at("clamped").get<bool>();
      er.degenerate = e.at("degenerate").get<bool>();
      rec.estimates.push_back(er);
    }
    for (const auto& f : j.at("forces")) {
      DroneForceRecord fr;
      fr.drone = f.at("drone").get<int>();
      fr.forces.at = read<3>(f.at("at"));
      fr.forces.inter = read<3>(f.at("inter"));
      fr.forces.rep = read<3>(f.at("rep"));
      fr.forces.inter_capped = read<3>(f.at("inter_capped"));
      fr.forces.rep_capped = read<3>(f.at("rep_capped"));
      fr.forces.inter_cap_applied = f.at("inter_cap").get<bool>();
      fr.forces.rep_cap_applied = f.at("rep_cap").get<bool>();
      fr.forces.resultant = read<3>(f.at("resultant"));
      fr.command = read<3>(f.at("u"));
      rec.forces.push_back(fr);
    }
    const json& m = j.at("metrics");
    rec.metrics.k = rec.k;
    for (const auto& t : m.at("targets")) {
      TargetMetrics tm;
      tm.target = t.at("target").get<int>();
      tm.est_error = read<4>(t.at("e"));
      tm.est_error_norm = t.at("e_norm").get<double>();
      tm.pos_error_norm = t.at("pos_err").get<double>();
      tm.as_error = read<2>(t.at("as_err"));
      tm.as_error_norm = t.at("as_norm").get<double>();
      rec.metrics.targets.push_back(tm);
    }
    rec.metrics.min_drone_distance = read_distance(m.at("min_drone_distance"));
    rec.metrics.min_obstacle_distance = read_distance(m.at("min_obstacle_distance"));
    rec.force_free = j.at("force_free").get<std::vector<bool>>();
    return rec;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed step record: ") + e.what());
  }
}

std::uint64_t log_hash(std::span<const StepRecord> log) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& rec : log) {
    h = fnv1a(step_to_json_line(rec), h);
    h = fnv1a("\n", h);
  }
  return h;
}

void write_step_log(const std::filesystem::path& path, std::span<const StepRecord> log) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  for (const auto& rec : log) out << step_to_json_line(rec) << '\n';
}

std::vector<StepRecord> read_step_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read " + path.string());
  std::vector<StepRecord> log;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) log.push_back(step_from_json_line(line));
  }
  return log;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const StepRecord> log) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  out.precision(17);
  out << "k";
  if (!log.empty()) {
    for (const auto& t : log.front().metrics.targets) {
      out << ",e_norm_" << t.target << ",pos_err_" << t.target << ",as_norm_" << t.target;
    }
  }
  out << ",min_drone_distance,min_obstacle_distance\n";
  for (const auto& rec : log) {
    out << rec.k;
    for (const auto& t : rec.metrics.targets) {
      out << ',' << t.est_error_norm << ',' << t.pos_error_norm << ',' << t.as_error_norm;
    }
    out << ',' << rec.metrics.min_drone_distance << ',';
    if (std::isfinite(rec.metrics.min_obstacle_distance)) out << rec.metrics.min_obstacle_distance;
    out << '\n';
  }
}

std::string assignment_trace_jsonl(const AssignmentResult& result) {
  std::string out;
  for (const auto& r : result.trace) {
    json j = {{"round", r.round},
              {"drone", r.drone},
              {"claimed_target", r.claimed_target ? json(*r.claimed_target) : json(nullptr)},
              {"released", r.released},
              {"table_hash", hex64(r.table_hash)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

namespace {

json audit_json(const AuditReport& a) {
  return {{"min_drone_distance", distance(a.min_drone_distance)},
          {"min_obstacle_distance", distance(a.min_obstacle_distance)},
          {"drone_violations", a.drone_violations},
          {"obstacle_violations", a.obstacle_violations},
          {"first_violation", a.first_violation ? json(*a.first_violation) : json(nullptr)},
          {"clean", a.clean()}};
}

json pairs_json(const std::vector<AssignedPair>& pairs) {
  json a = json::array();
  for (const auto& p : pairs) a.push_back({{"target", p.target}, {"lead", p.lead}, {"trail", p.trail}});
  return a;
}

json summary_json(const RunSummary& s) {
  json j;
  j["seed"] = s.seed;
  j["steps"] = s.steps;
  j["transient"] = s.transient;
  j["pairs"] = pairs_json(s.pairs);
  j["assignment_rounds"] = s.assignment_rounds;
  j["targets"] = json::array();
  for (const auto& t : s.targets) {
    j["targets"].push_back({{"target", t.target},
                            {"occupancy", t.occupancy},
                            {"ms_est_error", t.ms_est_error},
                            {"ms_as_error", t.ms_as_error},
                            {"max_zeta_condition", t.max_zeta_condition},
                            {"min_zeta_eig", t.min_zeta_eig},
                            {"clamp_events", t.clamp_events},
                            {"longest_force_free", t.longest_force_free}});
  }
  j["audit"] = audit_json(s.audit);
  j["max_z_drift"] = s.max_z_drift;
  j["max_as_error_after_first"] = s.max_as_error_after_first;
  j["max_pair_outer"] = s.max_pair_outer;
  j["log_hash"] = hex64(s.log_hash);
  return j;
}

json bound_json(const BoundReport& b) {
  return {{"samples", b.samples},
          {"ms_est_error", b.ms_est_error},
          {"ms_as_error", b.ms_as_error},
          {"bound", b.bound},
          {"holds", b.holds}};
}

}  // namespace

std::string summary_to_json(const RunSummary& summary) { return summary_json(summary).dump(2); }

std::string monte_carlo_to_json(const MonteCarloReport& report) {
  json j;
  j["runs"] = json::array();
  for (const auto& r : report.runs) {
    if (r.summary) {
      j["runs"].push_back(summary_json(*r.summary));
    } else {
      j["runs"].push_back({{"seed", r.seed},
                           {"error", {{"code", r.error_code}, {"message", r.error_message}, {"step", r.error_step}}}});
    }
  }
  j["failed"] = report.failed;
  j["targets"] = json::array();
  for (const auto& t : report.targets) {
    json tj = {{"target", t.target},
               {"samples", t.samples},
               {"occupancy", t.occupancy},
               {"ms_est_error", t.ms_est_error},
               {"ms_as_error", t.ms_as_error},
               {"quantile_levels", kReportQuantiles},
               {"pos_error_quantiles", t.pos_error_quantiles},
               {"as_error_quantiles", t.as_error_quantiles}};
    if (t.bound_evaluated) tj["bound"] = bound_json(t.bound);
    j["targets"].push_back(tj);
  }
  j["audit"] = audit_json(report.audit);
  return j.dump(2);
}

std::string analyze_log(const ScenarioConfig& cfg, std::span<const StepRecord> log, int window) {
  if (window < 3) throw ArgumentError("window must be at least 3");
  if (log.empty()) throw ArgumentError("empty step log");
  const SystemMatrices mats(cfg.t);
  const std::size_t m = cfg.targets.size();

  json report;
  report["window"] = window;
  report["steps"] = log.size();
  report["t"] = cfg.t;
  const EigenBounds eb = eigen_bounds(cfg.t);
  report["eigen_bounds"] = {{"a_lo", eb.a_lo}, {"a_hi", eb.a_hi}, {"b_hi", eb.b_hi}};

  std::vector<std::vector<Vec3>> frames;
  for (const auto& rec : log) {
    std::vector<Vec3> xs;
    for (const auto& d : rec.drones) xs.push_back(d.position);
    frames.push_back(std::move(xs));
  }

  report["targets"] = json::array();
  for (std::size_t j = 0; j < m; ++j) {
    json tj;
    tj["target"] = j;
    const Mat2& Q = cfg.targets[j].Q;
    Eigen::SelfAdjointEigenSolver<Mat2> qe(Q, Eigen::EigenvaluesOnly);

    // Sliding windows of consecutive updated steps.
    std::vector<WindowSample> run;
    long windows = 0;
    long observable = 0;
    std::optional<ObservabilityReport> last;
    double c_check = 0.0;
    long streak = 0;
    long best_streak = 0;
    for (const auto& rec : log) {
      const EstimateRecord* er = nullptr;
      for (const auto& e : rec.estimates) {
        if (e.target == static_cast<int>(j)) er = &e;
      }
      if (j < rec.force_free.size()) {
        streak = rec.force_free[j] ? streak + 1 : 0;
        best_streak = std::max(best_streak, streak);
      }
      if (er == nullptr || !er->updated) {
        run.clear();
        continue;
      }
      c_check = std::max(c_check, er->relative_position.squaredNorm());
      run.push_back(WindowSample{er->relative_position, er->var_hat});
      if (static_cast<int>(run.size()) > window + 1) run.erase(run.begin());
      if (static_cast<int>(run.size()) == window + 1) {
        ObservabilityReport obs = observability_gramian(run, mats);
        ++windows;
        if (obs.observable) ++observable;
        last = std::move(obs);
      }
    }
    tj["windows"] = windows;
    tj["observable_windows"] = observable;
    tj["c_check"] = c_check;
    tj["longest_force_free"] = best_streak;

    const ControllabilityReport ctrl = controllability_gramian(window, cfg.t, Q);
    tj["controllability"] = {{"eigenvalues", vec(ctrl.eigenvalues)}, {"positive_definite", ctrl.positive_definite}};
    if (last) {
      tj["observability"] = {{"rank", last->rank},
                             {"eigenvalues", vec(last->eigenvalues)},
                             {"singular_values", vec(last->singular_values)},
                             {"observable", last->observable}};
      const CovarianceBounds cb = covariance_bounds(*last, ctrl);
      const auto& final_est = log.back().estimates;
      json env = {{"upper", distance(cb.upper)}, {"lower", cb.lower}};
      for (const auto& e : final_est) {
        if (e.target != static_cast<int>(j)) continue;
        env["zeta_max_eig"] = e.zeta_max_eig;
        env["zeta_min_eig"] = e.zeta_min_eig;
        env["within"] = e.zeta_max_eig <= cb.upper && e.zeta_min_eig >= cb.lower;
      }
      tj["covariance_envelope"] = env;
    }

    std::vector<double> pos;
    std::vector<double> est_sq;
    std::vector<double> as;
    std::vector<double> as_sq;
    for (const auto& rec : log) {
      if (rec.k < cfg.transient) continue;
      for (const auto& t : rec.metrics.targets) {
        if (t.target != static_cast<int>(j)) continue;
        pos.push_back(t.pos_error_norm);
        est_sq.push_back(t.est_error_norm * t.est_error_norm);
        as.push_back(t.as_error_norm);
        as_sq.push_back(t.as_error_norm * t.as_error_norm);
      }
    }
    if (!pos.empty()) {
      json qs = json::object();
      for (double p : kReportQuantiles) {
        qs[std::to_string(p).substr(0, 4)] = {{"pos_error", quantile(pos, p)}, {"as_error", quantile(as, p)}};
      }
      tj["quantiles"] = qs;
    }
    if (pos.size() >= kMinBoundSamples) {
      tj["bound"] = bound_json(theorem_bounds(est_sq, as_sq, eb.a_hi, qe.eigenvalues()(1), cfg.t));
    } else {
      tj["bound"] = {{"skipped", "fewer than 1000 post-transient samples"}, {"samples", pos.size()}};
    }
    report["targets"].push_back(tj);
  }

  report["audit"] = audit_json(collision_audit(frames, cfg.obstacles, cfg.a_tilde, cfg.controller.r_safe));
  double z_drift = 0.0;
  for (const auto& rec : log) {
    for (std::size_t i = 0; i < rec.drones.size(); ++i) {
      z_drift = std::max(z_drift, std::abs(rec.drones[i].position.z() - log.front().drones[i].position.z()));
    }
  }
  report["max_z_drift"] = z_drift;
  return report.dump(2);
}

}  // namespace encircle
