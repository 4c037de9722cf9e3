#pragma once

// Adaptive feature synchronization: score-adaptive EMA of a track's local
// feature plus a small LRU bank of key features kept for view changes.

#include <cstddef>
#include <vector>

#include "drone_assoc/core.hpp"

namespace drone_assoc {

class KeyFeatureBank {
 public:
  struct Entry {
    FeatureEmbedding feature;
    FrameIndex last_used = 0;
  };

  explicit KeyFeatureBank(std::size_t capacity = 10);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  // Novel features (cosine distance to every entry above the threshold) are
  // inserted, evicting the least recently used entry when full. Otherwise the
  // closest entry is marked used at `frame`. Returns true on insertion.
  bool maybe_insert(const FeatureEmbedding& f, FrameIndex frame, double novelty_threshold);

 private:
  std::size_t capacity_;
  std::vector<Entry> entries_;
};

// alpha_f + (1 - alpha_f) * exp(theta - s), clamped to at most 1.
double adaptive_alpha(double score, double theta, double alpha_f);

// Renormalized blend alpha * previous + (1 - alpha) * current.
FeatureEmbedding blend_features(const FeatureEmbedding& previous, const FeatureEmbedding& current,
                                double alpha);

// 1 - best cosine similarity of `f` against the local feature and every key
// feature, clamped to [0, 1].
double appearance_cost(const FeatureEmbedding& local_feature, const KeyFeatureBank& bank,
                       const FeatureEmbedding& f);

}  // namespace drone_assoc
