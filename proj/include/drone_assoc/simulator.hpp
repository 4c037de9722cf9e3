#pragma once

// Deterministic synthetic drone scenes. Objects move in a 2D world; the camera
// is a rigid image-plane transform driven by a script of hover, translate and
// rotate phases. Every output (ground truth, noisy detections, embeddings and
// the exact inter-frame affines) is a pure function of the config.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "drone_assoc/config_file.hpp"
#include "drone_assoc/core.hpp"
#include "drone_assoc/io.hpp"
#include "drone_assoc/motion.hpp"

namespace drone_assoc {

// Identifier of the random stream below; written to scenario.cfg.
inline constexpr const char* kScenarioRngId = "mt19937_64/u53/box-muller/v1";

// mt19937_64 with hand-written transforms, so streams do not depend on the
// standard library's distribution implementations.
class ScenarioRng {
 public:
  explicit ScenarioRng(std::uint64_t seed) : engine_(seed) {}

  double uniform();                         // [0, 1)
  double uniform(double lo, double hi);     // [lo, hi)
  double normal(double mean, double sigma); // one Box-Muller draw per call
  std::size_t index(std::size_t n);         // [0, n)
  int poisson(double lambda);               // Knuth multiplication method

 private:
  std::mt19937_64 engine_;
};

struct CameraPhase {
  enum class Kind { Hover, Translate, Rotate };
  Kind kind = Kind::Hover;
  double vx = 0.0;     // image-plane content shift, px/frame
  double vy = 0.0;
  double omega = 0.0;  // rad/frame, about the image center
  int duration = 0;    // frames

  static CameraPhase hover(int duration) { return {Kind::Hover, 0, 0, 0, duration}; }
  static CameraPhase translate(double vx, double vy, int duration) {
    return {Kind::Translate, vx, vy, 0, duration};
  }
  static CameraPhase rotate(double omega, int duration) { return {Kind::Rotate, 0, 0, omega, duration}; }

  friend bool operator==(const CameraPhase&, const CameraPhase&) = default;
};

struct OcclusionEvent {
  int object = 0;  // 0-based object index
  FrameIndex start = 1;
  int duration = 0;

  friend bool operator==(const OcclusionEvent&, const OcclusionEvent&) = default;
};

struct ScoreModel {
  double mean_hit = 0.8;
  double sigma_hit = 0.1;
  double mean_fp = 0.35;
  double sigma_fp = 0.15;

  friend bool operator==(const ScoreModel&, const ScoreModel&) = default;
};

struct ScenarioConfig {
  std::uint64_t seed = 42;
  int n_objects = 20;
  int n_frames = 600;
  // Objects bounce inside a world square of this side, whose top-left corner
  // sits at world_origin (frame-1 image coordinates).
  double world_extent = 600.0;
  Point2 world_origin{180.0, 160.0};
  double image_width = 1920.0;
  double image_height = 1080.0;
  double min_speed = 0.5;  // px/frame
  double max_speed = 2.0;
  double motion_jitter = 0.05;  // std of per-frame velocity perturbation
  double min_size = 16.0;
  double max_size = 40.0;
  int n_classes = 2;
  std::vector<CameraPhase> camera_script{CameraPhase::hover(600)};
  double detection_noise_sigma = 1.5;
  double miss_prob = 0.08;
  double false_positive_rate = 0.5;
  ScoreModel score_model;
  std::size_t embedding_dim = 128;
  // Radians of feature-space rotation per radian of cumulative camera rotation.
  double view_drift_rate = 0.5;
  // Per-component Gaussian noise added to unit embeddings before renormalizing.
  double embedding_noise = 0.03;
  std::vector<OcclusionEvent> occlusion_events;

  // Throws ValidationError (durations must sum to n_frames, probabilities in
  // [0, 1], and so on).
  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

ScenarioConfig standard_ablation_scenario();
// Zero noise, no misses or false positives, hovering camera.
ScenarioConfig noiseless_hover_scenario();
// Named presets: "standard", "noiseless-hover". Throws ValidationError otherwise.
ScenarioConfig named_scenario(const std::string& name);

KeyValueConfig to_key_value(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_key_value(const KeyValueConfig& kv);

struct Scenario {
  std::vector<MotLine> gt;
  std::vector<MotLine> detections;
  std::vector<EmbeddingRecord> embeddings;
  // Frame t -> transform from frame t-1 to t, for every t >= 2.
  AffineMap affines;
  // Camera phase of each frame; index 0 is frame 1.
  std::vector<CameraPhase::Kind> phase_of_frame;
};

Scenario generate_scenario(const ScenarioConfig& cfg);

struct ScenarioPaths {
  std::filesystem::path gt;
  std::filesystem::path detections;
  std::filesystem::path embeddings;
  std::filesystem::path affines;
  std::filesystem::path config;
};

ScenarioPaths scenario_paths(const std::filesystem::path& dir);
// Writes gt.txt, det.txt, emb.bin, affine.txt and scenario.cfg into `dir`.
ScenarioPaths write_scenario(const Scenario& scenario, const ScenarioConfig& cfg,
                             const std::filesystem::path& dir);

}  // namespace drone_assoc
