#pragma once

#include <cstddef>
#include <map>

#include "drone_assoc/core.hpp"

namespace drone_assoc {

struct ClearMotResult {
  double mota = 0.0;
  // Mean IoU over matched pairs (0 when nothing matched).
  double motp = 0.0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t id_switches = 0;
  std::size_t matches = 0;
  std::size_t gt_total = 0;

  struct Coverage {
    std::size_t present = 0;
    std::size_t matched = 0;
  };
  // Per ground-truth identity: frames present and frames matched.
  std::map<TrackId, Coverage> coverage;
};

// CLEAR-MOT matching per frame: correspondences from earlier frames are kept
// while their IoU stays at or above the threshold, the rest are assigned by
// minimum (1 - IoU). A ground-truth identity matched to a different result id
// than its previous correspondence counts an identity switch. Throws
// ValidationError for an empty ground truth.
ClearMotResult clear_mot(const LabeledSequence& gt, const LabeledSequence& results,
                         double iou_threshold = 0.5);

struct IdMetrics {
  double idf1 = 0.0;
  double idp = 0.0;
  double idr = 0.0;
  std::size_t idtp = 0;
  std::size_t idfp = 0;
  std::size_t idfn = 0;
};

// Identity precision/recall/F1 under the one-to-one mapping between ground
// truth and result identities that maximizes frames of overlap (IoU at or
// above the threshold). Throws ValidationError for an empty ground truth.
IdMetrics id_metrics(const LabeledSequence& gt, const LabeledSequence& results,
                     double iou_threshold = 0.5);

struct MtMl {
  std::size_t mt = 0;
  std::size_t ml = 0;
};

// Mostly tracked: matched in >= 80% of its frames; mostly lost: <= 20%.
MtMl mt_ml(const ClearMotResult& clear);
MtMl mt_ml(const LabeledSequence& gt, const LabeledSequence& results, double iou_threshold = 0.5);

struct EvalReport {
  double mota = 0.0;
  double motp = 0.0;
  double idf1 = 0.0;
  double idp = 0.0;
  double idr = 0.0;
  std::size_t fp = 0;
  std::size_t fn_ = 0;
  std::size_t id_switches = 0;
  std::size_t mt = 0;
  std::size_t ml = 0;
  std::size_t gt_total = 0;
};

EvalReport evaluate(const LabeledSequence& gt, const LabeledSequence& results, double iou_threshold = 0.5);

}  // namespace drone_assoc
