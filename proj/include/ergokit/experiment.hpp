#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergokit/errors.hpp"

namespace ergokit {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct ExperimentConfig {
  std::string experiment;
  nlohmann::json environment;  // {"name": ..., "params": {...}}
  nlohmann::json algorithm;    // {"name": ..., "config": {...}}
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir;
  bool emit_plots = false;
  nlohmann::json raw;

  static ExperimentConfig load(const std::filesystem::path& path);
  static ExperimentConfig from_json(const nlohmann::json& j, const std::string& origin);
};

/// FNV-1a over the canonical (key-sorted) dump; stable under key reordering.
std::string config_hash(const nlohmann::json& j);

struct MetricRow {
  std::uint64_t seed = 0;
  std::string name;
  double value = 0.0;
};

struct RunResult {
  std::filesystem::path output_dir;
  std::vector<std::string> files;  // relative to output_dir, manifest order
  std::vector<MetricRow> metrics;
};

/// Executes one configured experiment for every seed, writes CSVs (and plots
/// when enabled), then writes manifest.json last. Unknown environment or
/// algorithm names raise UnknownComponent listing the registered candidates.
RunResult run_experiment(const ExperimentConfig& config);

/// Grid sweep: config.raw must hold {"sweep": {"parameter": dotted.path,
/// "values": [...]}}. Each grid point runs into point_<i>/ and the long-format
/// sweep.csv collects (parameter, value, seed, metric, metric_value).
RunResult sweep_experiment(const ExperimentConfig& config);

std::vector<std::string> registered_environments();
std::vector<std::string> registered_algorithms();

struct PlotRequest {
  std::vector<std::filesystem::path> inputs;
  std::string kind;  // trajectories | preference | curve | transformation | gap
  std::filesystem::path output;
  std::string y_column;  // curve kind only
};

void render_plot(const PlotRequest& request);

struct AnalyzeChainResult {
  std::string report_text;
  std::string dot_text;
};

AnalyzeChainResult analyze_chain_files(const std::filesystem::path& mdp_path,
                                       const std::optional<std::filesystem::path>& policy_path,
                                       bool want_dot);

/// Applies ERGOKIT_OUTPUT_ROOT to relative output directories.
std::filesystem::path resolve_output_dir(const std::filesystem::path& configured);

}  // namespace ergokit
