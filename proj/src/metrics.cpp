#include "drone_assoc/metrics.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include "drone_assoc/assignment.hpp"
#include "drone_assoc/error.hpp"

namespace drone_assoc {

namespace {

std::size_t box_count(const LabeledSequence& seq) {
  std::size_t n = 0;
  for (const auto& [frame, boxes] : seq) n += boxes.size();
  return n;
}

std::set<FrameIndex> all_frames(const LabeledSequence& a, const LabeledSequence& b) {
  std::set<FrameIndex> frames;
  for (const auto& [f, v] : a) frames.insert(f);
  for (const auto& [f, v] : b) frames.insert(f);
  return frames;
}

const std::vector<LabeledBox>& boxes_at(const LabeledSequence& seq, FrameIndex frame) {
  static const std::vector<LabeledBox> kEmpty;
  const auto it = seq.find(frame);
  return it == seq.end() ? kEmpty : it->second;
}

void require_gt(const LabeledSequence& gt) {
  if (box_count(gt) == 0) throw ValidationError("ground truth is empty; metrics are undefined");
}

}  // namespace

ClearMotResult clear_mot(const LabeledSequence& gt, const LabeledSequence& results, double iou_threshold) {
  require_gt(gt);
  ClearMotResult out;
  std::map<TrackId, TrackId> last_match;
  double iou_sum = 0.0;

  for (FrameIndex frame : all_frames(gt, results)) {
    const auto& gts = boxes_at(gt, frame);
    const auto& hyps = boxes_at(results, frame);
    std::vector<char> gt_used(gts.size(), 0);
    std::vector<char> hyp_used(hyps.size(), 0);
    for (const auto& g : gts) ++out.coverage[g.id].present;

    auto record = [&](std::size_t gi, std::size_t hi, double overlap) {
      gt_used[gi] = 1;
      hyp_used[hi] = 1;
      ++out.matches;
      ++out.coverage[gts[gi].id].matched;
      iou_sum += overlap;
      last_match[gts[gi].id] = hyps[hi].id;
    };

    // Keep earlier correspondences that are still valid.
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      const auto it = last_match.find(gts[gi].id);
      if (it == last_match.end()) continue;
      for (std::size_t hi = 0; hi < hyps.size(); ++hi) {
        if (hyp_used[hi] || hyps[hi].id != it->second) continue;
        const double overlap = iou(gts[gi].box, hyps[hi].box);
        if (overlap >= iou_threshold) record(gi, hi, overlap);
        break;
      }
    }

    std::vector<std::size_t> free_gt;
    std::vector<std::size_t> free_hyp;
    for (std::size_t gi = 0; gi < gts.size(); ++gi)
      if (!gt_used[gi]) free_gt.push_back(gi);
    for (std::size_t hi = 0; hi < hyps.size(); ++hi)
      if (!hyp_used[hi]) free_hyp.push_back(hi);

    CostMatrix cost(free_gt.size(), free_hyp.size(), kForbidden);
    for (std::size_t r = 0; r < free_gt.size(); ++r) {
      for (std::size_t c = 0; c < free_hyp.size(); ++c) {
        const double overlap = iou(gts[free_gt[r]].box, hyps[free_hyp[c]].box);
        if (overlap >= iou_threshold) cost(r, c) = 1.0 - overlap;
      }
    }
    for (const auto& [r, c] : linear_assignment(cost).matches) {
      const std::size_t gi = free_gt[r];
      const std::size_t hi = free_hyp[c];
      const auto prev = last_match.find(gts[gi].id);
      if (prev != last_match.end() && prev->second != hyps[hi].id) ++out.id_switches;
      record(gi, hi, iou(gts[gi].box, hyps[hi].box));
    }

    for (char used : gt_used) out.fn += used ? 0 : 1;
    for (char used : hyp_used) out.fp += used ? 0 : 1;
    out.gt_total += gts.size();
  }

  out.mota = 1.0 - static_cast<double>(out.fp + out.fn + out.id_switches) / static_cast<double>(out.gt_total);
  out.motp = out.matches == 0 ? 0.0 : iou_sum / static_cast<double>(out.matches);
  return out;
}

IdMetrics id_metrics(const LabeledSequence& gt, const LabeledSequence& results, double iou_threshold) {
  require_gt(gt);
  std::map<TrackId, std::size_t> gt_index;
  std::map<TrackId, std::size_t> res_index;
  for (const auto& [f, boxes] : gt)
    for (const auto& b : boxes) gt_index.emplace(b.id, gt_index.size());
  for (const auto& [f, boxes] : results)
    for (const auto& b : boxes) res_index.emplace(b.id, res_index.size());

  // overlap[g][r]: frames where both identities are present with IoU >= threshold.
  std::vector<std::vector<std::size_t>> overlap(gt_index.size(), std::vector<std::size_t>(res_index.size(), 0));
  for (const auto& [frame, gts] : gt) {
    const auto& hyps = boxes_at(results, frame);
    for (const auto& g : gts) {
      for (const auto& h : hyps) {
        if (iou(g.box, h.box) >= iou_threshold) ++overlap[gt_index.at(g.id)][res_index.at(h.id)];
      }
    }
  }

  std::size_t best = 0;
  for (const auto& row : overlap)
    for (std::size_t v : row) best = std::max(best, v);
  CostMatrix cost(gt_index.size(), res_index.size());
  for (std::size_t g = 0; g < gt_index.size(); ++g)
    for (std::size_t r = 0; r < res_index.size(); ++r)
      cost(g, r) = static_cast<double>(best - overlap[g][r]);

  IdMetrics out;
  for (const auto& [g, r] : linear_assignment(cost).matches) out.idtp += overlap[g][r];
  const std::size_t gt_total = box_count(gt);
  const std::size_t res_total = box_count(results);
  out.idfp = res_total - out.idtp;
  out.idfn = gt_total - out.idtp;
  out.idp = res_total == 0 ? 0.0 : static_cast<double>(out.idtp) / static_cast<double>(res_total);
  out.idr = static_cast<double>(out.idtp) / static_cast<double>(gt_total);
  out.idf1 = 2.0 * static_cast<double>(out.idtp) / static_cast<double>(gt_total + res_total);
  return out;
}

MtMl mt_ml(const ClearMotResult& clear) {
  MtMl out;
  for (const auto& [id, c] : clear.coverage) {
    if (c.present == 0) continue;
    const double ratio = static_cast<double>(c.matched) / static_cast<double>(c.present);
    if (ratio >= 0.8) ++out.mt;
    if (ratio <= 0.2) ++out.ml;
  }
  return out;
}

MtMl mt_ml(const LabeledSequence& gt, const LabeledSequence& results, double iou_threshold) {
  return mt_ml(clear_mot(gt, results, iou_threshold));
}

EvalReport evaluate(const LabeledSequence& gt, const LabeledSequence& results, double iou_threshold) {
  const ClearMotResult clear = clear_mot(gt, results, iou_threshold);
  const IdMetrics ids = id_metrics(gt, results, iou_threshold);
  const MtMl coverage = mt_ml(clear);
  EvalReport r;
  r.mota = clear.mota;
  r.motp = clear.motp;
  r.idf1 = ids.idf1;
  r.idp = ids.idp;
  r.idr = ids.idr;
  r.fp = clear.fp;
  r.fn_ = clear.fn;
  r.id_switches = clear.id_switches;
  r.mt = coverage.mt;
  r.ml = coverage.ml;
  r.gt_total = clear.gt_total;
  return r;
}

}  // namespace drone_assoc
