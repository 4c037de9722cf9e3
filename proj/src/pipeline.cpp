#include "drone_assoc/pipeline.hpp"

#include <algorithm>

#include "drone_assoc/error.hpp"

namespace drone_assoc {

TrackingRun run_tracker(const DetectionSequence& sequence, const AffineMap& affines,
                        const TrackerConfig& config) {
  Tracker tracker(config);
  TrackingRun run;
  FrameIndex last = 0;
  if (!sequence.frames.empty()) last = sequence.frames.back().frame;
  if (!affines.empty()) last = std::max(last, affines.rbegin()->first);

  auto next = sequence.frames.begin();
  for (FrameIndex frame = 1; frame <= last; ++frame) {
    FrameDetections empty{frame, {}};
    const FrameDetections* input = &empty;
    if (next != sequence.frames.end() && next->frame == frame) {
      input = &*next;
      ++next;
    }
    std::optional<AffineTransform> affine;
    if (!affines.empty() && frame >= 2) affine = affine_for(affines, frame);
    auto out = tracker.step(*input, affine);
    run.outputs.insert(run.outputs.end(), out.begin(), out.end());
    run.diagnostics.push_back(tracker.last_diagnostics());
    ++run.frames;
  }
  run.tracks_created = tracker.tracks_created();
  return run;
}

LabeledSequence to_labeled_sequence(const std::vector<TrackOutput>& outputs) {
  LabeledSequence seq;
  for (const auto& o : outputs) seq[o.frame].push_back({o.id, o.box, o.class_id});
  return seq;
}

ScenarioInputs scenario_inputs(const Scenario& scenario) {
  ScenarioInputs in;
  MotFile dets;
  dets.lines = scenario.detections;
  in.detections = group_detections(dets);
  for (const auto& rec : scenario.embeddings) {
    std::vector<double> raw(rec.values.begin(), rec.values.end());
    in.embeddings.emplace(EmbeddingKey{rec.frame, rec.ordinal}, FeatureEmbedding::normalize(raw));
  }
  MotFile gt;
  gt.lines = scenario.gt;
  in.gt = to_labeled_sequence(gt);
  return in;
}

std::string to_string(AblationVariant v) {
  switch (v) {
    case AblationVariant::Baseline: return "baseline";
    case AblationVariant::Dmp: return "+DMP";
    case AblationVariant::Afs: return "+AFS";
    case AblationVariant::Full: return "+DMP+AFS";
  }
  return "unknown";
}

std::vector<AblationVariant> all_ablation_variants() {
  return {AblationVariant::Baseline, AblationVariant::Dmp, AblationVariant::Afs, AblationVariant::Full};
}

TrackerConfig ablation_config(AblationVariant v, TrackerConfig base) {
  const bool dmp = v == AblationVariant::Dmp || v == AblationVariant::Full;
  const bool afs = v == AblationVariant::Afs || v == AblationVariant::Full;
  base.dmp_enabled = dmp;
  base.afs_enabled = afs;
  if (!dmp) base.w_r = 0.0;
  return base;
}

std::vector<AblationRow> run_ablation(const ScenarioConfig& scenario, const TrackerConfig& base,
                                      const std::vector<AblationVariant>& variants) {
  const Scenario generated = generate_scenario(scenario);
  ScenarioInputs inputs = scenario_inputs(generated);
  attach_embeddings(inputs.detections, inputs.embeddings, base.theta_low);

  std::vector<AblationRow> rows;
  for (AblationVariant v : variants) {
    const TrackingRun run = run_tracker(inputs.detections, generated.affines, ablation_config(v, base));
    rows.push_back({v, evaluate(inputs.gt, to_labeled_sequence(run.outputs)), run.tracks_created});
  }
  return rows;
}

namespace {

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * fraction);
  return buf;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string format_eval_table(const EvalReport& r) {
  const std::vector<std::pair<std::string, std::string>> cols{
      {"IDF1", pct(r.idf1)}, {"IDP", pct(r.idp)}, {"IDR", pct(r.idr)},
      {"MOTA", pct(r.mota)}, {"MOTP", pct(r.motp)}, {"MT", std::to_string(r.mt)},
      {"ML", std::to_string(r.ml)}, {"FP", std::to_string(r.fp)}, {"FN", std::to_string(r.fn_)},
      {"IDs", std::to_string(r.id_switches)}, {"GT", std::to_string(r.gt_total)}};
  std::string header;
  std::string row;
  for (const auto& [name, value] : cols) {
    const std::size_t w = std::max<std::size_t>(7, std::max(name.size(), value.size()) + 1);
    header += pad(name, w);
    row += pad(value, w);
  }
  return header + "\n" + row + "\n";
}

std::string format_eval_csv(const EvalReport& r) {
  return "mota,motp,idf1,idp,idr,fp,fn,id_switches,mt,ml,gt_total\n" + fixed(r.mota) + "," + fixed(r.motp) +
         "," + fixed(r.idf1) + "," + fixed(r.idp) + "," + fixed(r.idr) + "," + std::to_string(r.fp) + "," +
         std::to_string(r.fn_) + "," + std::to_string(r.id_switches) + "," + std::to_string(r.mt) + "," +
         std::to_string(r.ml) + "," + std::to_string(r.gt_total) + "\n";
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  std::string out = pad("Variant", 10) + pad("MOTA(%)", 9) + pad("IDs", 7) + pad("IDF1(%)", 9) +
                    pad("IDP(%)", 8) + pad("IDR(%)", 8) + "\n";
  for (const auto& row : rows) {
    out += pad(to_string(row.variant), 10) + pad(pct(row.report.mota), 9) +
           pad(std::to_string(row.report.id_switches), 7) + pad(pct(row.report.idf1), 9) +
           pad(pct(row.report.idp), 8) + pad(pct(row.report.idr), 8) + "\n";
  }
  return out;
}

std::string format_ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "variant,mota,id_switches,idf1,idp,idr,fp,fn,tracks_created\n";
  for (const auto& row : rows) {
    out += to_string(row.variant) + "," + fixed(row.report.mota) + "," + std::to_string(row.report.id_switches) +
           "," + fixed(row.report.idf1) + "," + fixed(row.report.idp) + "," + fixed(row.report.idr) + "," +
           std::to_string(row.report.fp) + "," + std::to_string(row.report.fn_) + "," +
           std::to_string(row.tracks_created) + "\n";
  }
  return out;
}

}  // namespace drone_assoc
