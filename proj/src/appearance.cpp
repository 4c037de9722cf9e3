#include "drone_assoc/appearance.hpp"

#include <algorithm>
#include <cmath>

#include "drone_assoc/error.hpp"

namespace drone_assoc {

KeyFeatureBank::KeyFeatureBank(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ValidationError("key feature bank capacity must be at least 1");
  entries_.reserve(capacity_);
}

bool KeyFeatureBank::maybe_insert(const FeatureEmbedding& f, FrameIndex frame, double novelty_threshold) {
  if (!entries_.empty()) {
    std::size_t closest = 0;
    double best_distance = 1.0 - cosine_similarity(f, entries_[0].feature);
    for (std::size_t i = 1; i < entries_.size(); ++i) {
      const double d = 1.0 - cosine_similarity(f, entries_[i].feature);
      if (d < best_distance) {
        best_distance = d;
        closest = i;
      }
    }
    if (best_distance <= novelty_threshold) {
      entries_[closest].last_used = std::max(entries_[closest].last_used, frame);
      return false;
    }
  }
  if (entries_.size() < capacity_) {
    entries_.push_back({f, frame});
    return true;
  }
  // Lowest index wins ties so eviction is deterministic.
  auto lru = std::min_element(entries_.begin(), entries_.end(),
                              [](const Entry& a, const Entry& b) { return a.last_used < b.last_used; });
  *lru = {f, frame};
  return true;
}

double adaptive_alpha(double score, double theta, double alpha_f) {
  return std::min(1.0, alpha_f + (1.0 - alpha_f) * std::exp(theta - score));
}

FeatureEmbedding blend_features(const FeatureEmbedding& previous, const FeatureEmbedding& current,
                                double alpha) {
  if (previous.dim() != current.dim()) throw ValidationError("embedding dimension mismatch in blend");
  if (alpha >= 1.0) return previous;
  std::vector<double> mixed(previous.dim());
  for (std::size_t i = 0; i < mixed.size(); ++i) {
    mixed[i] = alpha * previous[i] + (1.0 - alpha) * current[i];
  }
  // Antipodal inputs at alpha = 0.5 cancel; keep the history in that case.
  try {
    return FeatureEmbedding::normalize(mixed);
  } catch (const EmbeddingError&) {
    return previous;
  }
}

double appearance_cost(const FeatureEmbedding& local_feature, const KeyFeatureBank& bank,
                       const FeatureEmbedding& f) {
  double best = local_feature.empty() ? -1.0 : cosine_similarity(local_feature, f);
  for (const auto& e : bank.entries()) best = std::max(best, cosine_similarity(e.feature, f));
  return std::clamp(1.0 - best, 0.0, 1.0);
}

}  // namespace drone_assoc
