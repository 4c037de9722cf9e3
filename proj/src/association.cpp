#include "drone_assoc/association.hpp"

#include <algorithm>
#include <string>

#include "drone_assoc/error.hpp"

namespace drone_assoc {

namespace {

bool class_compatible(const Track& t, const Detection& d) { return t.class_id == d.class_id; }

std::vector<Point2> centers_of(std::span<const Detection> dets) {
  std::vector<Point2> out;
  out.reserve(dets.size());
  for (const auto& d : dets) out.push_back(center(d.bbox));
  return out;
}

}  // namespace

CostMatrix build_cost_matrix(std::span<const Track> tracks, std::span<const Detection> detections,
                             std::span<const BoundingBox> predicted_boxes,
                             std::span<const std::optional<RotationVector>> det_descriptors,
                             const TrackerConfig& config) {
  if (predicted_boxes.size() != tracks.size() || det_descriptors.size() != detections.size()) {
    throw ValidationError("build_cost_matrix: misaligned inputs");
  }
  CostMatrix cost(tracks.size(), detections.size(), kForbidden);
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    for (std::size_t i = 0; i < detections.size(); ++i) {
      const Detection& det = detections[i];
      if (!class_compatible(tracks[j], det)) continue;
      const double overlap = iou(predicted_boxes[j], det.bbox);
      if (overlap < config.iou_gate) continue;
      double c = 1.0 - overlap;
      if (config.w_a > 0.0) c += config.w_a * appearance_cost(tracks[j], det.embedding);
      if (config.w_r > 0.0) c += config.w_r * rotation_cost(tracks[j].rotation, det_descriptors[i]);
      cost(j, i) = c;
    }
  }
  return cost;
}

CostMatrix build_iou_cost_matrix(std::span<const Track> tracks, std::span<const Detection> detections,
                                 std::span<const BoundingBox> predicted_boxes,
                                 const TrackerConfig& config) {
  if (predicted_boxes.size() != tracks.size()) {
    throw ValidationError("build_iou_cost_matrix: misaligned inputs");
  }
  CostMatrix cost(tracks.size(), detections.size(), kForbidden);
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    for (std::size_t i = 0; i < detections.size(); ++i) {
      if (!class_compatible(tracks[j], detections[i])) continue;
      const double overlap = iou(predicted_boxes[j], detections[i].bbox);
      if (overlap < config.iou_gate) continue;
      cost(j, i) = 1.0 - overlap;
    }
  }
  return cost;
}

void lifecycle_step(Track& track, bool matched, const TrackerConfig& config) {
  if (track.state == TrackState::Removed) return;
  if (matched) {
    track.lost_age = 0;
    ++track.consecutive_hits;
    if (track.state == TrackState::Lost ||
        (track.state == TrackState::Tentative && track.consecutive_hits >= config.confirm_hits)) {
      track.state = TrackState::Confirmed;
    }
    return;
  }
  track.consecutive_hits = 0;
  switch (track.state) {
    case TrackState::Tentative:
      track.state = TrackState::Removed;
      break;
    case TrackState::Confirmed:
      track.state = TrackState::Lost;
      track.lost_age = 1;
      break;
    case TrackState::Lost:
      ++track.lost_age;
      if (track.lost_age > config.max_lost_age) track.state = TrackState::Removed;
      break;
    case TrackState::Removed:
      break;
  }
}

Tracker::Tracker(TrackerConfig config, KalmanParams kalman)
    : config_(config), kalman_(kalman), rng_(config.seed) {
  config_.validate();
}

std::optional<AffineTransform> Tracker::estimate_camera_motion(FrameIndex frame,
                                                               std::span<const Detection> high) {
  // Pair each track seen in the previous frame with its mutual appearance
  // nearest neighbor among this frame's confident detections.
  std::vector<std::size_t> candidates;
  for (std::size_t j = 0; j < tracks_.size(); ++j) {
    const Track& t = tracks_[j];
    if (t.state == TrackState::Confirmed && t.last_update_frame == frame - 1 && !t.local_feature.empty()) {
      candidates.push_back(j);
    }
  }
  if (candidates.size() < 3 || high.size() < 3) return std::nullopt;

  const double min_similarity = 1.0 - config_.novelty_threshold;
  std::vector<std::ptrdiff_t> best_det(candidates.size(), -1);
  std::vector<double> best_det_sim(candidates.size(), -2.0);
  std::vector<std::ptrdiff_t> best_track(high.size(), -1);
  std::vector<double> best_track_sim(high.size(), -2.0);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const Track& t = tracks_[candidates[k]];
    for (std::size_t i = 0; i < high.size(); ++i) {
      if (!class_compatible(t, high[i])) continue;
      const double sim = cosine_similarity(t.local_feature, high[i].embedding);
      if (sim > best_det_sim[k]) {
        best_det_sim[k] = sim;
        best_det[k] = static_cast<std::ptrdiff_t>(i);
      }
      if (sim > best_track_sim[i]) {
        best_track_sim[i] = sim;
        best_track[i] = static_cast<std::ptrdiff_t>(k);
      }
    }
  }
  std::vector<Point2> prev_pts;
  std::vector<Point2> cur_pts;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (best_det[k] < 0 || best_det_sim[k] < min_similarity) continue;
    const auto i = static_cast<std::size_t>(best_det[k]);
    if (best_track[i] != static_cast<std::ptrdiff_t>(k)) continue;
    // Anchor at the constant-velocity prediction so the residual is camera motion
    // plus detection noise rather than the object's own movement.
    const StateVector& m = tracks_[candidates[k]].motion.mean;
    prev_pts.push_back({m(0) + m(4), m(1) + m(5)});
    cur_pts.push_back(center(high[i].bbox));
  }
  try {
    return estimate_affine(prev_pts, cur_pts, rng_);
  } catch (const AffineEstimationError&) {
    return std::nullopt;
  }
}

void Tracker::apply_match(Track& track, const Detection& det,
                          const std::optional<RotationVector>& descriptor, FrameIndex frame) {
  track.motion = kalman_update(track.motion, det.bbox, kalman_);
  // Low-score detections only correct geometry; their appearance is too noisy.
  if (det.score >= config_.theta_high) {
    if (config_.afs_enabled) {
      update_local_feature(track, det.embedding, det.score, config_.theta_high, config_.alpha_f);
      track.key_bank.maybe_insert(det.embedding, frame, config_.novelty_threshold);
    } else {
      track.local_feature = blend_features(track.local_feature, det.embedding, config_.alpha_f);
    }
  }
  track.rotation = descriptor;
  track.last_box = det.bbox;
  track.last_score = det.score;
  track.last_update_frame = frame;
  lifecycle_step(track, true, config_);
}

Track Tracker::spawn(const Detection& det, const std::optional<RotationVector>& descriptor,
                     FrameIndex frame, bool first_frame) {
  Track t{.id = next_id_++,
          .class_id = det.class_id,
          .state = TrackState::Tentative,
          .motion = kalman_init(det.bbox, kalman_),
          .local_feature = det.embedding,
          .key_bank = KeyFeatureBank(static_cast<std::size_t>(config_.key_bank_capacity)),
          .rotation = descriptor,
          .last_update_frame = frame,
          .consecutive_hits = 1,
          .lost_age = 0,
          .last_box = det.bbox,
          .last_score = det.score};
  if (config_.afs_enabled) t.key_bank.maybe_insert(det.embedding, frame, config_.novelty_threshold);
  // Tracks born on the first frame have no history to confirm against.
  if (first_frame || t.consecutive_hits >= config_.confirm_hits) t.state = TrackState::Confirmed;
  return t;
}

std::vector<TrackOutput> Tracker::step(const FrameDetections& input,
                                       const std::optional<AffineTransform>& affine) {
  const FrameIndex frame = input.frame;
  if (last_frame_ && frame <= *last_frame_) {
    throw ValidationError("frame " + std::to_string(frame) + " does not follow frame " +
                          std::to_string(*last_frame_));
  }
  const bool first_frame = !last_frame_.has_value();
  last_frame_ = frame;
  diagnostics_ = FrameDiagnostics{};
  diagnostics_.frame = frame;

  std::vector<Detection> high;
  std::vector<Detection> low;
  for (const Detection& d : input.detections) {
    if (d.score >= config_.theta_high) {
      high.push_back(d);
    } else if (d.score >= config_.theta_low) {
      low.push_back(d);
    } else {
      ++diagnostics_.dropped_low_score;
    }
  }

  std::optional<AffineTransform> compensation;
  if (config_.dmp_enabled) {
    if (affine) {
      compensation = affine;
    } else if (config_.estimate_affine && !first_frame) {
      compensation = estimate_camera_motion(frame, high);
      diagnostics_.affine_estimated = compensation.has_value();
    }
  }
  if (compensation) diagnostics_.applied_affine = *compensation;
  const std::vector<BoundingBox> predicted = predict_tracks(tracks_, compensation, kalman_);

  // Triangle descriptors use the confident detections of this frame as the
  // neighborhood for every detection.
  const std::vector<Point2> neighbor_centers = centers_of(high);
  auto descriptors_for = [&](std::span<const Detection> dets) {
    std::vector<std::optional<RotationVector>> out(dets.size());
    if (config_.w_r > 0.0) {
      for (std::size_t i = 0; i < dets.size(); ++i) {
        out[i] = rotation_descriptor(center(dets[i].bbox), neighbor_centers, config_.radius_r);
      }
    }
    return out;
  };
  const auto high_desc = descriptors_for(high);
  const auto low_desc = descriptors_for(low);

  std::vector<char> matched(tracks_.size(), 0);

  // Stage 1: confident detections against every live track with the fused cost.
  const CostMatrix stage1 = build_cost_matrix(tracks_, high, predicted, high_desc, config_);
  const AssignmentResult first = linear_assignment(stage1);
  for (const auto& [j, i] : first.matches) {
    diagnostics_.stage1_ious.push_back(iou(predicted[j], high[i].bbox));
    apply_match(tracks_[j], high[i], high_desc[i], frame);
    matched[j] = 1;
  }

  // Stage 2: low-score detections against still-unmatched active tracks, IoU only.
  std::vector<std::size_t> remaining;
  for (std::size_t j : first.unmatched_rows) {
    if (tracks_[j].state == TrackState::Tentative || tracks_[j].state == TrackState::Confirmed) {
      remaining.push_back(j);
    }
  }
  if (!remaining.empty() && !low.empty()) {
    std::vector<Track> subset;
    std::vector<BoundingBox> subset_boxes;
    subset.reserve(remaining.size());
    for (std::size_t j : remaining) {
      subset.push_back(tracks_[j]);
      subset_boxes.push_back(predicted[j]);
    }
    const CostMatrix stage2 = build_iou_cost_matrix(subset, low, subset_boxes, config_);
    const AssignmentResult second = linear_assignment(stage2);
    for (const auto& [k, i] : second.matches) {
      const std::size_t j = remaining[k];
      apply_match(tracks_[j], low[i], low_desc[i], frame);
      matched[j] = 1;
      ++diagnostics_.stage2_matches;
    }
  }

  for (std::size_t j = 0; j < tracks_.size(); ++j) {
    if (!matched[j]) lifecycle_step(tracks_[j], false, config_);
  }

  for (std::size_t i : first.unmatched_cols) {
    tracks_.push_back(spawn(high[i], high_desc[i], frame, first_frame));
    ++diagnostics_.spawned;
  }

  std::erase_if(tracks_, [](const Track& t) { return t.state == TrackState::Removed; });

  std::vector<TrackOutput> out;
  for (const Track& t : tracks_) {
    if (t.state == TrackState::Confirmed && t.last_update_frame == frame) {
      out.push_back({frame, t.id, t.motion.box(), t.last_score, t.class_id});
    }
  }
  std::sort(out.begin(), out.end(), [](const TrackOutput& a, const TrackOutput& b) { return a.id < b.id; });
  return out;
}

}  // namespace drone_assoc
