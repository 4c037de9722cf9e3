#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

namespace drone_assoc {

using FrameIndex = std::int64_t;
using TrackId = std::int64_t;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

// Axis-aligned box in top-left + size form, the layout of MOT text files.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }

  // w > 0, h > 0 and every coordinate finite.
  bool valid() const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

double iou(const BoundingBox& a, const BoundingBox& b);
Point2 center(const BoundingBox& b);
double distance(Point2 a, Point2 b);

// Unit-norm appearance vector. The only way to obtain a non-empty embedding is
// normalize(), so every held vector has L2 norm 1 up to rounding.
class FeatureEmbedding {
 public:
  FeatureEmbedding() = default;

  // Throws EmbeddingError on zero norm, non-finite entries or an empty input.
  static FeatureEmbedding normalize(std::span<const double> raw);

  std::size_t dim() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const FeatureEmbedding&, const FeatureEmbedding&) = default;

 private:
  explicit FeatureEmbedding(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

// Dot product of two unit vectors; both must share a dimension.
double cosine_similarity(const FeatureEmbedding& a, const FeatureEmbedding& b);

struct Detection {
  BoundingBox bbox;
  double score = 1.0;
  int class_id = 0;
  FeatureEmbedding embedding;
  // Position of the line among the frame's lines in the source file; keys the
  // embedding sidecar.
  std::uint32_t ordinal = 0;
};

struct FrameDetections {
  FrameIndex frame = 1;
  std::vector<Detection> detections;
};

// Identity-labeled box as stored in ground-truth and result files.
struct LabeledBox {
  TrackId id = 0;
  BoundingBox box;
  int class_id = 0;
};

// Frame -> boxes present in that frame.
using LabeledSequence = std::map<FrameIndex, std::vector<LabeledBox>>;

enum class TrackState { Tentative, Confirmed, Lost, Removed };

std::string_view to_string(TrackState s);

// Whether `from -> to` is one of the permitted lifecycle edges (or a self loop).
bool is_allowed_transition(TrackState from, TrackState to);

struct TrackerConfig {
  double theta_high = 0.6;
  double theta_low = 0.1;
  double alpha_f = 0.9;
  double w_a = 0.5;
  double w_r = 0.1;
  double radius_r = 100.0;
  int key_bank_capacity = 10;
  double novelty_threshold = 0.25;
  double iou_gate = 0.1;
  int confirm_hits = 3;
  int max_lost_age = 30;

  // Ablation switches. Disabling AFS falls back to a fixed-weight EMA with no
  // key bank; disabling DMP skips the affine warp of the filter state.
  bool afs_enabled = true;
  bool dmp_enabled = true;

  // When a frame has no affine supplied, estimate one from detection centers
  // instead of assuming a hovering camera.
  bool estimate_affine = false;
  std::uint64_t seed = 0;

  // Throws ValidationError describing the first violated constraint.
  void validate() const;
};

}  // namespace drone_assoc
