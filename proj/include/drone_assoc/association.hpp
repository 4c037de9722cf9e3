#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "drone_assoc/assignment.hpp"
#include "drone_assoc/core.hpp"
#include "drone_assoc/motion.hpp"
#include "drone_assoc/track.hpp"

namespace drone_assoc {

// Fused cost (1 - IoU) + w_a * A_C + w_r * R_C between predicted track boxes
// and detections. Pairs below the IoU gate or of different classes are
// forbidden.
CostMatrix build_cost_matrix(std::span<const Track> tracks, std::span<const Detection> detections,
                             std::span<const BoundingBox> predicted_boxes,
                             std::span<const std::optional<RotationVector>> det_descriptors,
                             const TrackerConfig& config);

// Geometry-only variant used by the low-score stage.
CostMatrix build_iou_cost_matrix(std::span<const Track> tracks, std::span<const Detection> detections,
                                 std::span<const BoundingBox> predicted_boxes,
                                 const TrackerConfig& config);

// Lifecycle transition for one frame; `matched` says whether the track
// consumed a detection in this frame.
void lifecycle_step(Track& track, bool matched, const TrackerConfig& config);

// One confirmed track position emitted for a frame.
struct TrackOutput {
  FrameIndex frame = 0;
  TrackId id = 0;
  BoundingBox box;
  double score = 0.0;
  int class_id = 0;
};

struct FrameDiagnostics {
  FrameIndex frame = 0;
  // IoU between predicted box and matched detection for each high-score match.
  std::vector<double> stage1_ious;
  std::size_t stage2_matches = 0;
  std::size_t spawned = 0;
  std::size_t dropped_low_score = 0;
  // The affine actually used for compensation (identity when none).
  AffineTransform applied_affine;
  bool affine_estimated = false;
};

// Online two-stage tracker for a single sequence. Not thread-safe; one
// instance per sequence.
class Tracker {
 public:
  explicit Tracker(TrackerConfig config, KalmanParams kalman = {});

  // Processes the next frame. `affine` maps the previous frame into this one;
  // absent means hovering unless affine estimation is enabled. Throws
  // ValidationError when frame indices do not strictly increase.
  std::vector<TrackOutput> step(const FrameDetections& frame,
                                const std::optional<AffineTransform>& affine = std::nullopt);

  const std::vector<Track>& tracks() const { return tracks_; }
  std::size_t tracks_created() const { return static_cast<std::size_t>(next_id_ - 1); }
  const FrameDiagnostics& last_diagnostics() const { return diagnostics_; }
  const TrackerConfig& config() const { return config_; }

 private:
  std::optional<AffineTransform> estimate_camera_motion(FrameIndex frame,
                                                        std::span<const Detection> high);
  void apply_match(Track& track, const Detection& det, const std::optional<RotationVector>& descriptor,
                   FrameIndex frame);
  Track spawn(const Detection& det, const std::optional<RotationVector>& descriptor, FrameIndex frame,
              bool first_frame);

  TrackerConfig config_;
  KalmanParams kalman_;
  std::vector<Track> tracks_;
  TrackId next_id_ = 1;
  std::optional<FrameIndex> last_frame_;
  std::mt19937_64 rng_;
  FrameDiagnostics diagnostics_;
};

}  // namespace drone_assoc
