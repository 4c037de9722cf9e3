#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "drone_assoc/core.hpp"
#include "drone_assoc/error.hpp"

using namespace drone_assoc;

TEST(BoundingBoxTest, IouOfIdenticalBoxesIsOne) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
}

TEST(BoundingBoxTest, IouOfDisjointBoxesIsZero) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {100, 100, 5, 5}), 0.0);
}

TEST(BoundingBoxTest, IouOfHalfShiftedBox) {
  // Intersection 5x10 = 50, union 100 + 100 - 50 = 150.
  EXPECT_NEAR(iou({0, 0, 10, 10}, {5, 0, 10, 10}), 50.0 / 150.0, 1e-15);
}

TEST(BoundingBoxTest, TouchingEdgesDoNotOverlap) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0);
}

TEST(BoundingBoxTest, Center) {
  EXPECT_EQ(center({0, 0, 10, 10}), (Point2{5, 5}));
  EXPECT_EQ(center({10, 20, 0.5, 0.5}), (Point2{10.25, 20.25}));
  EXPECT_EQ(center({-4, -4, 8, 8}), (Point2{0, 0}));
}

TEST(BoundingBoxTest, Validity) {
  EXPECT_TRUE((BoundingBox{0, 0, 1, 1}).valid());
  EXPECT_FALSE((BoundingBox{0, 0, 0, 1}).valid());
  EXPECT_FALSE((BoundingBox{0, 0, 1, -2}).valid());
  EXPECT_FALSE((BoundingBox{NAN, 0, 1, 1}).valid());
}

TEST(BoundingBoxTest, IouProperties) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-50, 50);
  std::uniform_real_distribution<double> size(1, 40);
  for (int i = 0; i < 2000; ++i) {
    const BoundingBox a{pos(rng), pos(rng), size(rng), size(rng)};
    const BoundingBox b{pos(rng), pos(rng), size(rng), size(rng)};
    EXPECT_EQ(iou(a, b), iou(b, a));
    EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
    const double v = iou(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    // Shifts by powers of two keep every coordinate exactly representable.
    const double dx = std::ldexp(static_cast<double>(i % 7), 3);
    const double dy = -std::ldexp(static_cast<double>(i % 5), 2);
    const BoundingBox as{a.x + dx, a.y + dy, a.w, a.h};
    const BoundingBox bs{b.x + dx, b.y + dy, b.w, b.h};
    EXPECT_NEAR(iou(as, bs), v, 1e-12);
  }
}

TEST(FeatureEmbeddingTest, NormalizesToUnitLength) {
  const std::vector<double> raw{3, 4, 0, 0};
  const FeatureEmbedding f = FeatureEmbedding::normalize(raw);
  ASSERT_EQ(f.dim(), 4u);
  EXPECT_NEAR(f[0], 0.6, 1e-15);
  EXPECT_NEAR(f[1], 0.8, 1e-15);
  EXPECT_EQ(f[2], 0.0);
}

TEST(FeatureEmbeddingTest, BasisVectorIsUnchanged) {
  const std::vector<double> e1{1, 0, 0};
  EXPECT_EQ(FeatureEmbedding::normalize(e1).values()[0], 1.0);
}

TEST(FeatureEmbeddingTest, RejectsDegenerateInput) {
  const std::vector<double> zero(8, 0.0);
  EXPECT_THROW(FeatureEmbedding::normalize(zero), EmbeddingError);
  EXPECT_THROW(FeatureEmbedding::normalize(std::vector<double>{}), EmbeddingError);
  EXPECT_THROW(FeatureEmbedding::normalize(std::vector<double>{1.0, INFINITY}), EmbeddingError);
}

TEST(FeatureEmbeddingTest, NormalizeIsIdempotent) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 5);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> raw(32);
    for (double& v : raw) v = n(rng);
    const FeatureEmbedding once = FeatureEmbedding::normalize(raw);
    const FeatureEmbedding twice = FeatureEmbedding::normalize(once.values());
    for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_NEAR(once[i], twice[i], 1e-9);
  }
}

TEST(FeatureEmbeddingTest, CosineSimilarity) {
  const auto a = FeatureEmbedding::normalize(std::vector<double>{1, 0});
  const auto b = FeatureEmbedding::normalize(std::vector<double>{1, 1});
  EXPECT_NEAR(cosine_similarity(a, b), std::sqrt(0.5), 1e-15);
  const auto c = FeatureEmbedding::normalize(std::vector<double>{1, 0, 0});
  EXPECT_THROW(cosine_similarity(a, c), ValidationError);
}

TEST(TrackStateTest, AllowedTransitions) {
  using S = TrackState;
  EXPECT_TRUE(is_allowed_transition(S::Tentative, S::Confirmed));
  EXPECT_TRUE(is_allowed_transition(S::Tentative, S::Removed));
  EXPECT_TRUE(is_allowed_transition(S::Confirmed, S::Lost));
  EXPECT_TRUE(is_allowed_transition(S::Lost, S::Confirmed));
  EXPECT_TRUE(is_allowed_transition(S::Lost, S::Removed));
  EXPECT_FALSE(is_allowed_transition(S::Removed, S::Confirmed));
  EXPECT_FALSE(is_allowed_transition(S::Confirmed, S::Tentative));
  EXPECT_EQ(to_string(S::Lost), "Lost");
}

TEST(TrackerConfigTest, DefaultsValidate) { EXPECT_NO_THROW(TrackerConfig{}.validate()); }

TEST(TrackerConfigTest, RejectsInconsistentThresholds) {
  TrackerConfig c;
  c.theta_low = 0.7;
  EXPECT_THROW(c.validate(), ValidationError);
  c = TrackerConfig{};
  c.alpha_f = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
  c = TrackerConfig{};
  c.key_bank_capacity = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = TrackerConfig{};
  c.w_a = -1;
  EXPECT_THROW(c.validate(), ValidationError);
}
