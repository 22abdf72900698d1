#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "encircle/runner.hpp"

namespace encircle {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

/// One JSON object per step, stable field names, no trailing newline.
std::string step_to_json_line(const StepRecord& rec);
/// Inverse of step_to_json_line. Throws ArgumentError on malformed input.
StepRecord step_from_json_line(const std::string& line);

/// FNV-1a over the newline-joined JSON lines.
std::uint64_t log_hash(std::span<const StepRecord> log);

void write_step_log(const std::filesystem::path& path, std::span<const StepRecord> log);
std::vector<StepRecord> read_step_log(const std::filesystem::path& path);

/// (k, per-target |e|, |s - s_hat|, |e_bar|, min drone distance, min obstacle distance).
void write_metrics_csv(const std::filesystem::path& path, std::span<const StepRecord> log);

/// One record per (round, drone).
std::string assignment_trace_jsonl(const AssignmentResult& result);

/// Scalar statistics only; the per-step series are left out.
std::string summary_to_json(const RunSummary& summary);
std::string monte_carlo_to_json(const MonteCarloReport& report);

/// Post-hoc report over a logged run: Gramians on the final window, covariance
/// envelope, bound check when enough samples exist, collision audit and quantiles.
std::string analyze_log(const ScenarioConfig& cfg, std::span<const StepRecord> log, int window);

}  // namespace encircle
