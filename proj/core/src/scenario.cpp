#include "encircle/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "encircle/errors.hpp"
#include "encircle/estimator.hpp"

namespace encircle {

using nlohmann::json;

void ScenarioConfig::validate() const {
  if (!(std::isfinite(t) && t > 0.0)) throw ConfigError("t must be positive");
  if (steps < 1) throw ConfigError("steps must be at least 1");
  if (transient < 0) throw ConfigError("transient must be non-negative");
  if (window < 3) throw ConfigError("window must be at least 3");
  if (!(eps_tilde > 1.0)) throw ConfigError("eps_tilde must exceed 1");
  if (!(a_tilde > 0.0 && b_tilde > 0.0)) throw ConfigError("a_tilde and b_tilde must be positive");
  sensor.validate();
  controller.validate();
  shape.validate();
  if (std::abs(controller.r_safe - (a_tilde + b_tilde)) > 1e-12) {
    throw ConfigError("controller r_safe must equal a_tilde + b_tilde");
  }
  if (targets.empty()) throw ConfigError("at least one target is required");
  if (drones.size() != 2 * targets.size()) {
    throw ConfigError("scenario needs exactly two drones per target");
  }
  if (!zeta0.allFinite() || !zeta0.isApprox(zeta0.transpose(), 1e-12) || !(min_eigenvalue(zeta0) > 0.0)) {
    throw ConfigError("zeta0 must be symmetric positive definite");
  }
  for (std::size_t i = 0; i < drones.size(); ++i) {
    if (drones[i].id != static_cast<int>(i)) throw ConfigError("drone ids must be 0..N-1 in order");
    if (!drones[i].position.allFinite() || !drones[i].velocity.allFinite()) {
      throw ConfigError("drone state must be finite");
    }
  }
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const auto& spec = targets[j];
    if (spec.initial.id != static_cast<int>(j)) throw ConfigError("target ids must be 0..M-1 in order");
    if (!spec.initial.position.allFinite() || !spec.initial.velocity.allFinite()) {
      throw ConfigError("target state must be finite");
    }
    if (!spec.Q.allFinite() || std::abs(spec.Q(0, 1) - spec.Q(1, 0)) > 1e-12) {
      throw ConfigError("target Q must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat2> eig(spec.Q, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues()(0) < 0.0) throw ConfigError("target Q must be positive semidefinite");
    if (!spec.scripted_omega.empty() && static_cast<long>(spec.scripted_omega.size()) < steps) {
      throw ConfigError("scripted omega shorter than the step count");
    }
    for (const auto& w : spec.scripted_omega) {
      if (!w.allFinite()) throw ConfigError("scripted omega must be finite");
    }
  }
  for (std::size_t o = 0; o < obstacles.size(); ++o) {
    if (obstacles[o].id != static_cast<int>(o)) throw ConfigError("obstacle ids must be 0..O-1 in order");
    if (!obstacles[o].position.allFinite()) throw ConfigError("obstacle position must be finite");
  }
}

ScenarioConfig golden_scenario() {
  ScenarioConfig cfg;
  cfg.name = "golden";
  for (int i = 0; i < 6; ++i) {
    cfg.drones.push_back(DroneState{i, Vec3(1.5 + 0.5 * i, 2.0, 2.0), Vec3::Zero()});
  }
  const Vec2 starts[] = {Vec2(-2.0, 2.5), Vec2(2.0, 1.0), Vec2(3.0, 2.5)};
  for (int j = 0; j < 3; ++j) {
    TargetSpec spec;
    spec.initial = TargetState{j, starts[j], Vec2::Zero()};
    spec.Q = 0.05 * Mat2::Identity();
    cfg.targets.push_back(spec);
  }
  cfg.obstacles.push_back(Obstacle{0, Vec3(-2.0, 1.6, 2.0)});
  cfg.obstacles.push_back(Obstacle{1, Vec3(2.0, 0.1, 2.0)});
  cfg.controller.r_safe = cfg.a_tilde + cfg.b_tilde;
  return cfg;
}

namespace {

Eigen::VectorXd read_vec(const json& j, Eigen::Index n, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    throw ConfigError(std::string(what) + " must be an array of " + std::to_string(n) + " numbers");
  }
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw ConfigError(std::string(what) + " must be numeric");
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

// Scalar means a multiple of the identity.
template <int N>
Eigen::Matrix<double, N, N> read_square(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>() * Eigen::Matrix<double, N, N>::Identity();
  if (!j.is_array() || j.size() != N) throw ConfigError(std::string(what) + " has the wrong shape");
  Eigen::Matrix<double, N, N> m;
  for (int r = 0; r < N; ++r) m.row(r) = read_vec(j[static_cast<std::size_t>(r)], N, what).transpose();
  return m;
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename M>
json matrix_json(const M& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

template <typename V>
json vec_json(const V& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

const std::set<std::string>& known_top_keys() {
  static const std::set<std::string> keys = {"name",  "t",        "steps",    "seed",   "transient",
                                             "window", "eps_tilde", "zeta0",   "flags",  "sensor",
                                             "controller", "shape",  "drones",  "targets", "obstacles"};
  return keys;
}

ScenarioConfig from_json(const json& root) {
  if (!root.is_object()) throw ConfigError("scenario must be an object");
  for (const auto& [key, _] : root.items()) {
    if (!known_top_keys().contains(key)) throw ConfigError("unknown scenario field '" + key + "'");
  }
  ScenarioConfig cfg;
  cfg.name = get_or<std::string>(root, "name", cfg.name);
  cfg.t = get_or(root, "t", cfg.t);
  cfg.steps = get_or(root, "steps", cfg.steps);
  cfg.seed = get_or<std::uint64_t>(root, "seed", cfg.seed);
  cfg.transient = get_or(root, "transient", cfg.transient);
  cfg.window = get_or(root, "window", cfg.window);
  cfg.eps_tilde = get_or(root, "eps_tilde", cfg.eps_tilde);
  if (root.contains("zeta0")) cfg.zeta0 = read_square<4>(root["zeta0"], "zeta0");

  if (root.contains("flags")) {
    const json& f = root["flags"];
    cfg.flags.noise = get_or(f, "noise", cfg.flags.noise);
    cfg.flags.attractive_only = get_or(f, "attractive_only", cfg.flags.attractive_only);
    cfg.flags.perfect_estimate = get_or(f, "perfect_estimate", cfg.flags.perfect_estimate);
  }
  if (root.contains("sensor")) {
    const json& s = root["sensor"];
    cfg.sensor.q = get_or(s, "q", cfg.sensor.q);
    cfg.sensor.f = get_or(s, "f", cfg.sensor.f);
    cfg.sensor.r1 = get_or(s, "r1", cfg.sensor.r1);
    cfg.sensor.r2 = get_or(s, "r2", cfg.sensor.r2);
  }
  if (root.contains("controller")) {
    const json& c = root["controller"];
    cfg.controller.gamma1 = get_or(c, "gamma1", cfg.controller.gamma1);
    cfg.controller.gamma2 = get_or(c, "gamma2", cfg.controller.gamma2);
    cfg.a_tilde = get_or(c, "a_tilde", cfg.a_tilde);
    cfg.b_tilde = get_or(c, "b_tilde", cfg.b_tilde);
    cfg.controller.delta_r = get_or(c, "delta_r", cfg.controller.delta_r);
    cfg.controller.cap = get_or(c, "cap", cfg.controller.cap);
    cfg.controller.u_max = get_or(c, "u_max", cfg.controller.u_max);
  }
  cfg.controller.r_safe = cfg.a_tilde + cfg.b_tilde;
  if (root.contains("shape")) {
    cfg.shape.rho = get_or(root["shape"], "rho", cfg.shape.rho);
    cfg.shape.ell = get_or(root["shape"], "ell", cfg.shape.ell);
  }

  if (!root.contains("drones") || !root["drones"].is_array()) throw ConfigError("'drones' array is required");
  int id = 0;
  for (const json& d : root["drones"]) {
    DroneState s;
    s.id = id++;
    s.position = read_vec(d.at("position"), 3, "drone position");
    if (d.contains("velocity")) s.velocity = read_vec(d["velocity"], 3, "drone velocity");
    cfg.drones.push_back(s);
  }
  if (!root.contains("targets") || !root["targets"].is_array()) throw ConfigError("'targets' array is required");
  id = 0;
  for (const json& tj : root["targets"]) {
    TargetSpec spec;
    spec.initial.id = id++;
    spec.initial.position = read_vec(tj.at("position"), 2, "target position");
    if (tj.contains("velocity")) spec.initial.velocity = read_vec(tj["velocity"], 2, "target velocity");
    if (tj.contains("Q")) spec.Q = read_square<2>(tj["Q"], "target Q");
    if (tj.contains("omega")) {
      for (const json& w : tj["omega"]) spec.scripted_omega.push_back(read_vec(w, 2, "omega"));
    }
    cfg.targets.push_back(spec);
  }
  id = 0;
  if (root.contains("obstacles")) {
    for (const json& oj : root["obstacles"]) {
      cfg.obstacles.push_back(Obstacle{id++, read_vec(oj.at("position"), 3, "obstacle position")});
    }
  }
  cfg.validate();
  return cfg;
}

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& item : node) a.push_back(yaml_to_json(item));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : node) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return o;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  const std::string& text = node.Scalar();
  if (node.Tag() == "!") return text;  // quoted
  if (text == "true" || text == "false") return text == "true";
  try {
    std::size_t used = 0;
    const long long as_int = std::stoll(text, &used);
    if (used == text.size()) return as_int;
  } catch (const std::exception&) {
  }
  try {
    std::size_t used = 0;
    const double as_double = std::stod(text, &used);
    if (used == text.size()) return as_double;
  } catch (const std::exception&) {
  }
  return text;
}

}  // namespace

ScenarioConfig parse_scenario_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  try {
    return from_json(root);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
}

ScenarioConfig parse_scenario_yaml(const std::string& text) {
  YAML::Node node;
  try {
    node = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("invalid YAML: ") + e.what());
  }
  try {
    return from_json(yaml_to_json(node));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string ext = path.extension().string();
  if (ext == ".json") return parse_scenario_json(buf.str());
  if (ext == ".yaml" || ext == ".yml") return parse_scenario_yaml(buf.str());
  throw ConfigError("unsupported config extension '" + ext + "'");
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json root;
  root["name"] = cfg.name;
  root["t"] = cfg.t;
  root["steps"] = cfg.steps;
  root["seed"] = cfg.seed;
  root["transient"] = cfg.transient;
  root["window"] = cfg.window;
  root["eps_tilde"] = cfg.eps_tilde;
  root["zeta0"] = matrix_json(cfg.zeta0);
  root["flags"] = {{"noise", cfg.flags.noise},
                   {"attractive_only", cfg.flags.attractive_only},
                   {"perfect_estimate", cfg.flags.perfect_estimate}};
  root["sensor"] = {{"q", cfg.sensor.q}, {"f", cfg.sensor.f}, {"r1", cfg.sensor.r1}, {"r2", cfg.sensor.r2}};
  root["controller"] = {{"gamma1", cfg.controller.gamma1}, {"gamma2", cfg.controller.gamma2},
                        {"a_tilde", cfg.a_tilde},          {"b_tilde", cfg.b_tilde},
                        {"delta_r", cfg.controller.delta_r}, {"cap", cfg.controller.cap},
                        {"u_max", cfg.controller.u_max}};
  root["shape"] = {{"rho", cfg.shape.rho}, {"ell", cfg.shape.ell}};
  root["drones"] = json::array();
  for (const auto& d : cfg.drones) {
    root["drones"].push_back({{"position", vec_json(d.position)}, {"velocity", vec_json(d.velocity)}});
  }
  root["targets"] = json::array();
  for (const auto& spec : cfg.targets) {
    json tj = {{"position", vec_json(spec.initial.position)},
               {"velocity", vec_json(spec.initial.velocity)},
               {"Q", matrix_json(spec.Q)}};
    if (!spec.scripted_omega.empty()) {
      tj["omega"] = json::array();
      for (const auto& w : spec.scripted_omega) tj["omega"].push_back(vec_json(w));
    }
    root["targets"].push_back(tj);
  }
  root["obstacles"] = json::array();
  for (const auto& o : cfg.obstacles) root["obstacles"].push_back({{"position", vec_json(o.position)}});
  return root.dump(2);
}

}  // namespace encircle
