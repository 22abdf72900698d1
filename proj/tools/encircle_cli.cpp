// encircle: run, batch and analyze encirclement scenarios.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "encircle/errors.hpp"
#include "encircle/log_io.hpp"
#include "encircle/runner.hpp"
#include "encircle/scenario.hpp"

namespace fs = std::filesystem;
using namespace encircle;

namespace {

int fail(const std::string& code, const std::string& message, std::optional<long> step = std::nullopt) {
  nlohmann::json err = {{"error", {{"code", code}, {"message", message}}}};
  if (step) err["error"]["step"] = *step;
  std::cerr << err.dump() << '\n';
  return 2;
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw ArgumentError("bad seed '" + text + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ArgumentError("bad seed '" + text + "'");
  }
}

// "1..20", "3,5,9" or a mix of both.
std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const std::size_t dots = item.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(parse_seed(item));
    } else {
      const auto lo = parse_seed(item.substr(0, dots));
      const auto hi = parse_seed(item.substr(dots + 2));
      if (hi < lo) throw ArgumentError("empty seed range '" + item + "'");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return seeds;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  out << text << '\n';
}

fs::path prepare_out(std::string out) {
  if (auto e = env("ENCIRCLE_OUT")) out = *e;
  if (out.empty()) throw ArgumentError("no output directory (use --out or ENCIRCLE_OUT)");
  fs::create_directories(out);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-target encirclement simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string seed_text;
  long steps = 0;

  auto* run = app.add_subcommand("run", "Run one scenario and write its logs");
  run->add_option("--config", config, "Scenario file (.json, .yaml)")->required();
  run->add_option("--seed", seed_text, "Seed (default: from config; ENCIRCLE_SEED overrides)");
  run->add_option("--steps", steps, "Step count override");
  run->add_option("--out", out, "Output directory (ENCIRCLE_OUT overrides)");

  std::string seeds_text;
  unsigned workers = 0;
  auto* mc = app.add_subcommand("mc", "Monte-Carlo batch over a seed list");
  mc->add_option("--config", config, "Scenario file")->required();
  mc->add_option("--seeds", seeds_text, "Seeds, e.g. 1..20 or 1,4,7")->required();
  mc->add_option("--steps", steps, "Step count override");
  mc->add_option("--out", out, "Output directory (ENCIRCLE_OUT overrides)");
  mc->add_option("--workers", workers, "Worker threads (0 = hardware)");

  std::string log_dir;
  int window = 0;
  auto* analyze = app.add_subcommand("analyze", "Gramian, bound and audit report for a run directory");
  analyze->add_option("--log", log_dir, "Directory written by 'run'")->required();
  analyze->add_option("--window", window, "Observability window m1 (default: from config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("argument", e.what());
  }

  try {
    if (*run) {
      ScenarioConfig cfg = load_scenario(config);
      if (steps > 0) cfg.steps = steps;
      if (!seed_text.empty()) cfg.seed = parse_seed(seed_text);
      if (auto e = env("ENCIRCLE_SEED")) cfg.seed = parse_seed(*e);
      const fs::path dir = prepare_out(out);
      const RunResult result = run_scenario(cfg);
      write_text(dir / "config.json", scenario_to_json(cfg));
      write_step_log(dir / "steps.jsonl", result.log);
      write_metrics_csv(dir / "metrics.csv", result.log);
      write_text(dir / "assignment.jsonl", assignment_trace_jsonl(result.assignment));
      write_text(dir / "summary.json", summary_to_json(result.summary));
      std::cout << summary_to_json(result.summary) << '\n';
    } else if (*mc) {
      ScenarioConfig cfg = load_scenario(config);
      if (steps > 0) cfg.steps = steps;
      const auto seeds = parse_seed_list(seeds_text);
      const fs::path dir = prepare_out(out);
      const MonteCarloReport report = run_monte_carlo(cfg, seeds, workers);
      write_text(dir / "config.json", scenario_to_json(cfg));
      write_text(dir / "monte_carlo.json", monte_carlo_to_json(report));
      std::cout << monte_carlo_to_json(report) << '\n';
    } else if (*analyze) {
      const fs::path dir = log_dir;
      const ScenarioConfig cfg = load_scenario(dir / "config.json");
      const auto log = read_step_log(dir / "steps.jsonl");
      const std::string report = analyze_log(cfg, log, window > 0 ? window : cfg.window);
      write_text(dir / "analysis.json", report);
      std::cout << report << '\n';
    }
  } catch (const RunError& e) {
    return fail(e.code(), e.what(), e.step());
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const fs::filesystem_error& e) {
    return fail("io", e.what());
  }
  return 0;
}
