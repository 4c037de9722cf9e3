#include "drone_assoc/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drone_assoc/error.hpp"

namespace drone_assoc {

bool BoundingBox::valid() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) &&
         std::isfinite(h) && w > 0.0 && h > 0.0;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double iy = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  // Areas use the same edge arithmetic as the overlap so iou(a, a) is exactly 1.
  const double area_a = (a.right() - a.x) * (a.bottom() - a.y);
  const double area_b = (b.right() - b.x) * (b.bottom() - b.y);
  const double uni = area_a + area_b - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Point2 center(const BoundingBox& b) { return {b.x + b.w / 2.0, b.y + b.h / 2.0}; }

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

FeatureEmbedding FeatureEmbedding::normalize(std::span<const double> raw) {
  if (raw.empty()) throw EmbeddingError("embedding has dimension 0");
  double sq = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v)) throw EmbeddingError("embedding has non-finite entries");
    sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0)) throw EmbeddingError("embedding has zero norm and cannot be used");
  std::vector<double> out(raw.begin(), raw.end());
  for (double& v : out) v /= norm;
  return FeatureEmbedding(std::move(out));
}

double cosine_similarity(const FeatureEmbedding& a, const FeatureEmbedding& b) {
  if (a.dim() != b.dim()) {
    throw ValidationError("embedding dimension mismatch: " + std::to_string(a.dim()) +
                          " vs " + std::to_string(b.dim()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a[i] * b[i];
  return dot;
}

std::string_view to_string(TrackState s) {
  switch (s) {
    case TrackState::Tentative: return "Tentative";
    case TrackState::Confirmed: return "Confirmed";
    case TrackState::Lost: return "Lost";
    case TrackState::Removed: return "Removed";
  }
  return "unknown";
}

bool is_allowed_transition(TrackState from, TrackState to) {
  if (from == to) return true;
  switch (from) {
    case TrackState::Tentative:
      return to == TrackState::Confirmed || to == TrackState::Removed;
    case TrackState::Confirmed:
      return to == TrackState::Lost;
    case TrackState::Lost:
      return to == TrackState::Confirmed || to == TrackState::Removed;
    case TrackState::Removed:
      return false;
  }
  return false;
}

void TrackerConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("tracker config: " + msg); };
  if (!(theta_high > 0.0 && theta_high <= 1.0)) fail("theta_high must lie in (0, 1]");
  if (!(theta_low >= 0.0 && theta_low < theta_high)) fail("theta_low must lie in [0, theta_high)");
  if (!(alpha_f > 0.0 && alpha_f < 1.0)) fail("alpha_f must lie in (0, 1)");
  if (!(w_a >= 0.0) || !std::isfinite(w_a)) fail("w_a must be a finite non-negative number");
  if (!(w_r >= 0.0) || !std::isfinite(w_r)) fail("w_r must be a finite non-negative number");
  if (!(radius_r > 0.0) || !std::isfinite(radius_r)) fail("radius must be positive");
  if (key_bank_capacity < 1) fail("key_bank_capacity must be at least 1");
  if (!(novelty_threshold >= 0.0 && novelty_threshold <= 2.0)) fail("novelty_threshold must lie in [0, 2]");
  if (!(iou_gate >= 0.0 && iou_gate <= 1.0)) fail("iou_gate must lie in [0, 1]");
  if (confirm_hits < 1) fail("confirm_hits must be at least 1");
  if (max_lost_age < 0) fail("max_lost_age must be non-negative");
}

}  // namespace drone_assoc
