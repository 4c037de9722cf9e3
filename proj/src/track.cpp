#include "drone_assoc/track.hpp"

namespace drone_assoc {

const FeatureEmbedding& update_local_feature(Track& track, const FeatureEmbedding& f, double score,
                                             double theta, double alpha_f) {
  if (track.local_feature.empty()) {
    track.local_feature = f;
  } else {
    track.local_feature = blend_features(track.local_feature, f, adaptive_alpha(score, theta, alpha_f));
  }
  return track.local_feature;
}

double appearance_cost(const Track& track, const FeatureEmbedding& f) {
  return appearance_cost(track.local_feature, track.key_bank, f);
}

std::vector<BoundingBox> predict_tracks(std::span<Track> tracks,
                                        const std::optional<AffineTransform>& m,
                                        const KalmanParams& params) {
  std::vector<BoundingBox> boxes;
  boxes.reserve(tracks.size());
  for (Track& t : tracks) {
    if (m) t.motion = warp_motion_state(t.motion, *m);
    t.motion = kalman_predict(t.motion, params);
    boxes.push_back(t.motion.box());
  }
  return boxes;
}

}  // namespace drone_assoc
