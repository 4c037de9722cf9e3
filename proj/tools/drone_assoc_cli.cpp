// drone_assoc: simulate drone scenes, track them, evaluate and ablate.
//
// Exit codes: 0 success, 2 usage or validation failure, 1 runtime failure.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "drone_assoc/app.hpp"
#include "drone_assoc/error.hpp"

namespace {

using namespace drone_assoc;

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("drone_assoc");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("DRONE_ASSOC_LOG")) {
    const std::string level = env;
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "warn") spdlog::set_level(spdlog::level::warn);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::warn("ignoring unknown DRONE_ASSOC_LOG level '{}'", level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Motion-driven association tracker for drone footage"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic drone scenario");
  std::string sim_config;
  std::string sim_scenario = "standard";
  std::optional<std::uint64_t> sim_seed;
  std::string sim_out;
  simulate->add_option("--config", sim_config, "Scenario key = value file");
  simulate->add_option("--scenario", sim_scenario, "Named preset (standard, noiseless-hover)");
  simulate->add_option("--seed", sim_seed, "Override the scenario seed");
  simulate->add_option("--out", sim_out, "Output directory")->required();

  // track
  auto* track = app.add_subcommand("track", "Run the tracker on detection files");
  TrackOptions topt;
  track->add_option("--config", topt.config, "Run config key = value file");
  track->add_option("--detections", topt.detections, "MOT detections file");
  track->add_option("--embeddings", topt.embeddings, "Embedding sidecar (binary, or .csv)");
  track->add_option("--affines", topt.affines, "Per-frame affine CSV");
  track->add_option("--output", topt.output, "Results file to write");
  track->add_option("--embedding-dim", topt.embedding_dim, "Embedding dimension");
  track->add_option("--w-a", topt.w_a, "Appearance cost weight");
  track->add_option("--w-r", topt.w_r, "Rotation cost weight");
  track->add_option("--radius", topt.radius, "Neighbor radius for the rotation descriptor (px)");
  track->add_option("--theta-high", topt.theta_high, "High detection score threshold");
  track->add_option("--theta-low", topt.theta_low, "Low detection score threshold");
  track->add_flag("--no-afs", topt.no_afs, "Fixed-weight EMA, no key feature bank");
  track->add_flag("--no-dmp", topt.no_dmp, "No camera-motion warp of the filter state");
  track->add_flag("--no-rotation", topt.no_rotation, "Drop the rotation cost term");
  track->add_flag("--estimate-affine", topt.estimate_affine, "Estimate camera motion when no affine is given");

  // eval
  auto* eval = app.add_subcommand("eval", "Score results against ground truth");
  std::string eval_gt;
  std::string eval_results;
  double eval_iou = 0.5;
  std::string eval_csv;
  eval->add_option("--gt", eval_gt, "Ground-truth MOT file")->required();
  eval->add_option("--results", eval_results, "Tracker results MOT file")->required();
  eval->add_option("--iou", eval_iou, "IoU threshold for a match");
  eval->add_option("--csv", eval_csv, "Also write the CSV report here");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Compare baseline, +DMP, +AFS and full association");
  std::string abl_scenario = "standard";
  std::optional<std::uint64_t> abl_seed;
  std::string abl_toggles = "baseline,dmp,afs,full";
  std::string abl_out;
  ablate->add_option("--scenario", abl_scenario, "Named scenario preset");
  ablate->add_option("--seed", abl_seed, "Override the scenario seed");
  ablate->add_option("--toggles", abl_toggles, "Comma-separated subset of baseline,dmp,afs,full");
  ablate->add_option("--out", abl_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*simulate) {
      const auto cfg = load_scenario_config(
          sim_config.empty() ? std::nullopt : std::optional<std::filesystem::path>(sim_config), sim_scenario,
          sim_seed);
      const auto paths = run_simulate(cfg, sim_out);
      std::cout << "wrote " << paths.gt.string() << ", " << paths.detections.string() << ", "
                << paths.embeddings.string() << ", " << paths.affines.string() << ", "
                << paths.config.string() << "\n";
    } else if (*track) {
      RunConfig cfg;
      try {
        cfg = resolve_run_config(topt);
      } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << track->help();
        return 2;
      }
      const TrackSummary summary = run_track(cfg);
      if (summary.malformed_lines > 0) spdlog::warn("skipped {} malformed detection lines", summary.malformed_lines);
      if (summary.ingest.clamped_scores > 0) {
        spdlog::warn("clamped {} detection scores into [0, 1]", summary.ingest.clamped_scores);
      }
      spdlog::info("dropped {} detections below theta_low", summary.ingest.dropped_low_score);
      std::cout << format_track_summary(summary) << "\n";
    } else if (*eval) {
      const EvalReport report = run_eval(eval_gt, eval_results, eval_iou);
      std::cout << format_eval_table(report) << "\n" << format_eval_csv(report);
      if (!eval_csv.empty()) write_text_file(eval_csv, format_eval_csv(report));
    } else if (*ablate) {
      const auto cfg = load_scenario_config(std::nullopt, abl_scenario, abl_seed);
      const auto rows = run_ablate(cfg, parse_variants(abl_toggles), abl_out);
      std::cout << format_ablation_table(rows);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
