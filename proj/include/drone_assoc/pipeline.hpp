#pragma once

#include <string>
#include <utility>
#include <vector>

#include "drone_assoc/association.hpp"
#include "drone_assoc/io.hpp"
#include "drone_assoc/metrics.hpp"
#include "drone_assoc/simulator.hpp"

namespace drone_assoc {

struct TrackingRun {
  std::vector<TrackOutput> outputs;
  std::vector<FrameDiagnostics> diagnostics;  // one per processed frame
  std::size_t tracks_created = 0;
  std::size_t frames = 0;
};

// Steps a fresh tracker through every frame from 1 to the last frame that has
// detections or an affine line (frames without detections are processed
// empty). With an empty affine map the camera is treated as hovering, or the
// affine is estimated when the config asks for it; otherwise missing frames
// are identity.
TrackingRun run_tracker(const DetectionSequence& sequence, const AffineMap& affines,
                        const TrackerConfig& config);

// Results of a run as a labeled sequence, ready for evaluation.
LabeledSequence to_labeled_sequence(const std::vector<TrackOutput>& outputs);

// Scenario outputs in exactly the form the file readers would produce.
struct ScenarioInputs {
  DetectionSequence detections;
  EmbeddingMap embeddings;
  LabeledSequence gt;
};
ScenarioInputs scenario_inputs(const Scenario& scenario);

// Tracker setting for one ablation row.
enum class AblationVariant { Baseline, Dmp, Afs, Full };
std::string to_string(AblationVariant v);
std::vector<AblationVariant> all_ablation_variants();
// Baseline: fixed-weight EMA, no warp, no rotation term. Dmp adds the warp and
// rotation term; Afs the adaptive EMA with key bank; Full both.
TrackerConfig ablation_config(AblationVariant v, TrackerConfig base = {});

struct AblationRow {
  AblationVariant variant = AblationVariant::Baseline;
  EvalReport report;
  std::size_t tracks_created = 0;
};

std::vector<AblationRow> run_ablation(const ScenarioConfig& scenario, const TrackerConfig& base = {},
                                      const std::vector<AblationVariant>& variants = all_ablation_variants());

// Plain-text tables (percentages) and CSV twins (fractions).
std::string format_eval_table(const EvalReport& r);
std::string format_eval_csv(const EvalReport& r);
std::string format_ablation_table(const std::vector<AblationRow>& rows);
std::string format_ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace drone_assoc
