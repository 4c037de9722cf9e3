#pragma once

// Command implementations behind the command-line tool.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "drone_assoc/io.hpp"
#include "drone_assoc/metrics.hpp"
#include "drone_assoc/pipeline.hpp"
#include "drone_assoc/simulator.hpp"

namespace drone_assoc {

struct TrackOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> detections;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> affines;
  std::optional<std::filesystem::path> output;
  std::optional<double> w_a;
  std::optional<double> w_r;
  std::optional<double> radius;
  std::optional<double> theta_high;
  std::optional<double> theta_low;
  std::optional<std::size_t> embedding_dim;
  bool no_afs = false;
  bool no_dmp = false;
  bool no_rotation = false;
  bool estimate_affine = false;
};

// Config file values first, explicit flags on top. Throws ValidationError when
// a required path is missing or the resulting tracker config is invalid.
RunConfig resolve_run_config(const TrackOptions& options);

struct TrackSummary {
  std::size_t tracks_created = 0;
  std::size_t frames = 0;
  std::size_t result_lines = 0;
  std::size_t malformed_lines = 0;
  IngestStats ingest;
  double wall_seconds = 0.0;
};

TrackSummary run_track(const RunConfig& config);
std::string format_track_summary(const TrackSummary& s);

// Scenario from a key = value file, or a named preset when `config` is empty.
ScenarioConfig load_scenario_config(const std::optional<std::filesystem::path>& config,
                                    const std::string& preset, std::optional<std::uint64_t> seed);
ScenarioPaths run_simulate(const ScenarioConfig& scenario, const std::filesystem::path& out_dir);

EvalReport run_eval(const std::filesystem::path& gt, const std::filesystem::path& results, double iou_threshold);

// Parses "baseline,dmp,afs,full" (any subset, in that vocabulary).
std::vector<AblationVariant> parse_variants(const std::string& list);

// Writes ablation.txt and ablation.csv into out_dir and returns the rows.
std::vector<AblationRow> run_ablate(const ScenarioConfig& scenario, const std::vector<AblationVariant>& variants,
                                    const std::filesystem::path& out_dir);

}  // namespace drone_assoc
