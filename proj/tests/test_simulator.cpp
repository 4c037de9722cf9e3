#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <unistd.h>

#include "drone_assoc/error.hpp"
#include "drone_assoc/io.hpp"
#include "drone_assoc/simulator.hpp"

using namespace drone_assoc;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("drone_assoc_sim_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(ScenarioRngTest, StreamIsReproducible) {
  ScenarioRng a(5);
  ScenarioRng b(5);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.uniform(), b.uniform());
    EXPECT_EQ(a.normal(0, 1), b.normal(0, 1));
    EXPECT_EQ(a.poisson(0.5), b.poisson(0.5));
  }
}

TEST(ScenarioRngTest, MomentsAreSane) {
  ScenarioRng r(1);
  double s = 0;
  double s2 = 0;
  double pois = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal(2, 3);
    s += x;
    s2 += x * x;
    pois += r.poisson(0.5);
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.index(7), 7u);
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 2, 0.1);
  EXPECT_NEAR(std::sqrt(s2 / n - mean * mean), 3, 0.1);
  EXPECT_NEAR(pois / n, 0.5, 0.03);
}

TEST(ScenarioConfigTest, StandardPreset) {
  const ScenarioConfig c = standard_ablation_scenario();
  EXPECT_EQ(c, standard_ablation_scenario());
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.n_objects, 20);
  EXPECT_EQ(c.n_frames, 600);
  ASSERT_EQ(c.camera_script.size(), 4u);
  EXPECT_EQ(c.camera_script[1], CameraPhase::translate(4, 1, 200));
  EXPECT_EQ(c.camera_script[2], CameraPhase::rotate(0.02, 150));
  EXPECT_EQ(c.detection_noise_sigma, 1.5);
  EXPECT_EQ(c.miss_prob, 0.08);
  EXPECT_EQ(c.false_positive_rate, 0.5);
  ASSERT_EQ(c.occlusion_events.size(), 2u);
  for (const auto& o : c.occlusion_events) EXPECT_EQ(o.duration, 25);
  EXPECT_NO_THROW(c.validate());
}

TEST(ScenarioConfigTest, ValidationAndNames) {
  ScenarioConfig c = standard_ablation_scenario();
  c.n_frames = 601;
  EXPECT_THROW(c.validate(), ValidationError);
  c = standard_ablation_scenario();
  c.miss_prob = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_THROW(named_scenario("nope"), ValidationError);
  EXPECT_EQ(named_scenario("standard"), standard_ablation_scenario());
  EXPECT_EQ(named_scenario("noiseless-hover"), noiseless_hover_scenario());
}

TEST(ScenarioConfigTest, KeyValueRoundTrip) {
  for (const auto& c : {standard_ablation_scenario(), noiseless_hover_scenario()}) {
    const auto kv = to_key_value(c);
    EXPECT_EQ(scenario_from_key_value(kv), c);
    EXPECT_EQ(scenario_from_key_value(KeyValueConfig::parse(kv.to_string())), c);
  }
}

TEST(SimulatorTest, NoiselessHoverDetectionsEqualGroundTruth) {
  ScenarioConfig c = noiseless_hover_scenario();
  const Scenario s = generate_scenario(c);
  ASSERT_FALSE(s.gt.empty());
  std::map<FrameIndex, std::vector<BoundingBox>> gt_boxes;
  std::map<FrameIndex, std::vector<BoundingBox>> det_boxes;
  for (const auto& l : s.gt) gt_boxes[l.frame].push_back(l.box);
  for (const auto& l : s.detections) {
    EXPECT_EQ(l.id, -1);
    det_boxes[l.frame].push_back(l.box);
  }
  auto by_x = [](const BoundingBox& a, const BoundingBox& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); };
  for (auto& [f, v] : gt_boxes) std::sort(v.begin(), v.end(), by_x);
  for (auto& [f, v] : det_boxes) std::sort(v.begin(), v.end(), by_x);
  EXPECT_EQ(gt_boxes, det_boxes);
  for (const auto& [f, m] : s.affines) EXPECT_TRUE(m.is_identity());
}

TEST(SimulatorTest, TranslatePhaseIsTheSidecar) {
  ScenarioConfig c = standard_ablation_scenario();
  c.camera_script = {CameraPhase::hover(10), CameraPhase::translate(5, 0, 20), CameraPhase::hover(10)};
  c.n_frames = 40;
  c.occlusion_events.clear();
  const Scenario s = generate_scenario(c);
  ASSERT_EQ(s.affines.size(), 39u);
  for (FrameIndex f = 2; f <= 40; ++f) {
    const bool moving = f >= 11 && f <= 30;
    EXPECT_EQ(s.affines.at(f), moving ? AffineTransform::translation(5, 0) : AffineTransform::identity())
        << "frame " << f;
  }
}

TEST(SimulatorTest, StandardScenarioHas150RotationLines) {
  const ScenarioConfig c = standard_ablation_scenario();
  const Scenario s = generate_scenario(c);
  std::size_t rotation = 0;
  std::size_t translation = 0;
  for (const auto& [f, m] : s.affines) {
    if (m.is_identity()) continue;
    if (m.b != 0.0) {
      ++rotation;
    } else {
      ++translation;
    }
  }
  EXPECT_EQ(rotation, 150u);
  EXPECT_EQ(translation, 200u);
}

TEST(SimulatorTest, ComposedAffinesEqualNetCameraMotion) {
  const ScenarioConfig c = standard_ablation_scenario();
  const Scenario s = generate_scenario(c);
  AffineTransform net;
  for (const auto& [f, m] : s.affines) net = m.compose(net);
  // Independent expectation: total shift (800, 200) then 3 rad about the image center.
  const AffineTransform expected = AffineTransform::rotation(0.02 * 150, {960, 540})
                                       .compose(AffineTransform::translation(4.0 * 200, 1.0 * 200));
  EXPECT_NEAR(net.a, expected.a, 1e-6);
  EXPECT_NEAR(net.b, expected.b, 1e-6);
  EXPECT_NEAR(net.c, expected.c, 1e-6);
  EXPECT_NEAR(net.d, expected.d, 1e-6);
  EXPECT_NEAR(net.tx, expected.tx, 1e-6);
  EXPECT_NEAR(net.ty, expected.ty, 1e-6);
}

TEST(SimulatorTest, GroundTruthIsContinuous) {
  const ScenarioConfig c = standard_ablation_scenario();
  const Scenario s = generate_scenario(c);
  std::map<TrackId, std::pair<FrameIndex, Point2>> last;
  // Object speed plus the largest camera-induced shift; a rotation step moves
  // a point by at most omega times its distance from the image center.
  const double camera_bound = std::max(std::hypot(4.0, 1.0), 0.02 * std::hypot(1920.0, 1080.0));
  for (const auto& l : s.gt) {
    const Point2 c0 = center(l.box);
    auto it = last.find(l.id);
    if (it != last.end() && it->second.first == l.frame - 1) {
      EXPECT_LE(distance(c0, it->second.second), c.max_speed + 4 * c.motion_jitter + camera_bound)
          << "id " << l.id << " frame " << l.frame;
    }
    last[l.id] = {l.frame, c0};
  }
}

TEST(SimulatorTest, EmbeddingsAreUnitNormAndKeyed) {
  const Scenario s = generate_scenario(standard_ablation_scenario());
  std::map<FrameIndex, std::uint32_t> per_frame;
  for (const auto& l : s.detections) ++per_frame[l.frame];
  std::size_t n = 0;
  for (const auto& r : s.embeddings) {
    double norm = 0;
    for (float v : r.values) norm += static_cast<double>(v) * v;
    EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-6);
    EXPECT_LT(r.ordinal, per_frame[r.frame]);
    ++n;
  }
  EXPECT_EQ(n, s.detections.size());
}

TEST(SimulatorTest, OcclusionRemovesDetections) {
  ScenarioConfig c = noiseless_hover_scenario();
  c.occlusion_events = {{0, 50, 25}};
  const Scenario s = generate_scenario(c);
  std::size_t gt_in_window = 0;
  std::size_t det_in_window = 0;
  for (const auto& l : s.gt) gt_in_window += l.frame >= 50 && l.frame < 75;
  for (const auto& l : s.detections) det_in_window += l.frame >= 50 && l.frame < 75;
  EXPECT_EQ(det_in_window + 25, gt_in_window);
}

TEST(SimulatorTest, WrittenFilesAreByteIdentical) {
  const ScenarioConfig c = standard_ablation_scenario();
  const fs::path a = temp_dir("a");
  const fs::path b = temp_dir("b");
  const auto pa = write_scenario(generate_scenario(c), c, a);
  const auto pb = write_scenario(generate_scenario(c), c, b);
  for (auto [x, y] : {std::pair{pa.gt, pb.gt}, {pa.detections, pb.detections}, {pa.embeddings, pb.embeddings},
                      {pa.affines, pb.affines}, {pa.config, pb.config}}) {
    EXPECT_EQ(read_text_file(x), read_text_file(y)) << x;
  }
  // The files read back into the same scenario.
  const auto cfg = scenario_from_key_value(KeyValueConfig::load(pa.config));
  EXPECT_EQ(cfg, c);
  EXPECT_EQ(parse_affines(pa.affines), generate_scenario(c).affines);
  EXPECT_EQ(parse_embeddings(pa.embeddings, c.embedding_dim).size(), generate_scenario(c).embeddings.size());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(SimulatorTest, DifferentSeedsDiffer) {
  ScenarioConfig c = standard_ablation_scenario();
  const auto a = format_mot_lines(generate_scenario(c).detections);
  c.seed = 43;
  EXPECT_NE(a, format_mot_lines(generate_scenario(c).detections));
}
