#include "drone_assoc/app.hpp"

#include <chrono>
#include <sstream>

#include "drone_assoc/error.hpp"

namespace drone_assoc {

RunConfig resolve_run_config(const TrackOptions& o) {
  RunConfig cfg;
  if (o.config) cfg = apply_run_config(KeyValueConfig::load(*o.config));
  if (o.detections) cfg.detections = *o.detections;
  if (o.embeddings) cfg.embeddings = *o.embeddings;
  if (o.affines) cfg.affines = *o.affines;
  if (o.output) cfg.output = *o.output;
  if (o.embedding_dim) cfg.embedding_dim = *o.embedding_dim;
  TrackerConfig& t = cfg.tracker;
  if (o.w_a) t.w_a = *o.w_a;
  if (o.w_r) t.w_r = *o.w_r;
  if (o.radius) t.radius_r = *o.radius;
  if (o.theta_high) t.theta_high = *o.theta_high;
  if (o.theta_low) t.theta_low = *o.theta_low;
  if (o.no_afs) t.afs_enabled = false;
  if (o.no_dmp) t.dmp_enabled = false;
  if (o.no_rotation) t.w_r = 0.0;
  if (o.estimate_affine) t.estimate_affine = true;

  if (cfg.detections.empty()) throw ValidationError("--detections is required");
  if (cfg.embeddings.empty()) throw ValidationError("--embeddings is required");
  if (cfg.output.empty()) throw ValidationError("--output is required");
  t.validate();
  return cfg;
}

TrackSummary run_track(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  TrackSummary summary;
  DetectionSequence seq = parse_detections(config.detections);
  summary.malformed_lines = seq.malformed_lines;
  const EmbeddingMap embeddings = parse_embeddings(config.embeddings, config.embedding_dim);
  summary.ingest = attach_embeddings(seq, embeddings, config.tracker.theta_low);
  AffineMap affines;
  if (config.affines) affines = parse_affines(*config.affines);

  const TrackingRun run = run_tracker(seq, affines, config.tracker);
  write_results(config.output, run.outputs);
  summary.tracks_created = run.tracks_created;
  summary.frames = run.frames;
  summary.result_lines = run.outputs.size();
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

std::string format_track_summary(const TrackSummary& s) {
  std::ostringstream os;
  os << "tracks_created=" << s.tracks_created << " frames=" << s.frames << " result_lines=" << s.result_lines
     << " wall_time_s=" << s.wall_seconds;
  return os.str();
}

ScenarioConfig load_scenario_config(const std::optional<std::filesystem::path>& config,
                                    const std::string& preset, std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg = config ? scenario_from_key_value(KeyValueConfig::load(*config)) : named_scenario(preset);
  if (seed) cfg.seed = *seed;
  cfg.validate();
  return cfg;
}

ScenarioPaths run_simulate(const ScenarioConfig& scenario, const std::filesystem::path& out_dir) {
  return write_scenario(generate_scenario(scenario), scenario, out_dir);
}

EvalReport run_eval(const std::filesystem::path& gt, const std::filesystem::path& results, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw ValidationError("--iou must lie in (0, 1]");
  return evaluate(parse_tracks(gt), parse_tracks(results), iou_threshold);
}

std::vector<AblationVariant> parse_variants(const std::string& list) {
  std::vector<AblationVariant> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "baseline") {
      out.push_back(AblationVariant::Baseline);
    } else if (item == "dmp") {
      out.push_back(AblationVariant::Dmp);
    } else if (item == "afs") {
      out.push_back(AblationVariant::Afs);
    } else if (item == "full") {
      out.push_back(AblationVariant::Full);
    } else if (!item.empty()) {
      throw ValidationError("unknown ablation variant '" + item + "' (use baseline, dmp, afs, full)");
    }
  }
  if (out.empty()) throw ValidationError("no ablation variants selected");
  return out;
}

std::vector<AblationRow> run_ablate(const ScenarioConfig& scenario, const std::vector<AblationVariant>& variants,
                                    const std::filesystem::path& out_dir) {
  const auto rows = run_ablation(scenario, TrackerConfig{}, variants);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ValidationError("cannot create directory " + out_dir.string() + ": " + ec.message());
  write_text_file(out_dir / "ablation.txt", format_ablation_table(rows));
  write_text_file(out_dir / "ablation.csv", format_ablation_csv(rows));
  return rows;
}

}  // namespace drone_assoc
