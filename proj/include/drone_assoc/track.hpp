#pragma once

#include <optional>
#include <span>
#include <vector>

#include "drone_assoc/appearance.hpp"
#include "drone_assoc/core.hpp"
#include "drone_assoc/motion.hpp"

namespace drone_assoc {

struct Track {
  TrackId id = 0;
  int class_id = 0;
  TrackState state = TrackState::Tentative;
  MotionState motion;
  FeatureEmbedding local_feature;
  KeyFeatureBank key_bank;
  std::optional<RotationVector> rotation;
  FrameIndex last_update_frame = 0;
  int consecutive_hits = 0;
  int lost_age = 0;
  // Box and score of the most recent matched detection.
  BoundingBox last_box;
  double last_score = 0.0;

  bool alive() const { return state != TrackState::Removed; }
};

// Score-adaptive local feature update: blend with adaptive_alpha(s, theta, alpha_f),
// store the result in the track and return it.
const FeatureEmbedding& update_local_feature(Track& track, const FeatureEmbedding& f, double score,
                                             double theta, double alpha_f);

double appearance_cost(const Track& track, const FeatureEmbedding& f);

// Advances every track's filter to the current frame: warp by `m` when given,
// then a constant-velocity predict. Returns the predicted boxes in track order.
// Hovering is the absent (or identity) transform.
std::vector<BoundingBox> predict_tracks(std::span<Track> tracks,
                                        const std::optional<AffineTransform>& m,
                                        const KalmanParams& params = {});

}  // namespace drone_assoc
