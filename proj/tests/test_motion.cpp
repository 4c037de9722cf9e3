#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "drone_assoc/error.hpp"
#include "drone_assoc/motion.hpp"
#include "drone_assoc/track.hpp"
#include "oracles.hpp"

using namespace drone_assoc;

namespace {

void expect_box_near(const BoundingBox& a, const BoundingBox& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.w, b.w, tol);
  EXPECT_NEAR(a.h, b.h, tol);
}

double min_eigenvalue(const StateCovariance& p) {
  Eigen::SelfAdjointEigenSolver<StateCovariance> es(p);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST(KalmanTest, InitMapsBoxToState) {
  const MotionState s = kalman_init({0, 0, 10, 10});
  StateVector expected;
  expected << 5, 5, 1, 10, 0, 0, 0, 0;
  EXPECT_EQ(s.mean, expected);
  const MotionState t = kalman_init({10, 20, 20, 10});
  expected << 20, 25, 2, 10, 0, 0, 0, 0;
  EXPECT_EQ(t.mean, expected);
  EXPECT_TRUE(s.covariance.isApprox(s.covariance.transpose()));
  for (int i = 0; i < 8; ++i) EXPECT_GT(s.covariance(i, i), 0.0);
}

TEST(KalmanTest, PredictKeepsStationaryState) {
  const MotionState s = kalman_predict(kalman_init({0, 0, 10, 10}));
  EXPECT_DOUBLE_EQ(s.mean(0), 5);
  EXPECT_DOUBLE_EQ(s.mean(1), 5);
  EXPECT_DOUBLE_EQ(s.mean(2), 1);
  EXPECT_DOUBLE_EQ(s.mean(3), 10);
}

TEST(KalmanTest, PredictAppliesVelocity) {
  MotionState s = kalman_init({0, 0, 10, 10});
  s.mean(4) = 3;
  EXPECT_DOUBLE_EQ(kalman_predict(s).mean(0), 8);
}

TEST(KalmanTest, UpdateThenPredictMatchesOracle) {
  MotionState s = kalman_init({0, 0, 10, 10});
  s = kalman_update(kalman_predict(s), {10, 0, 10, 10});
  s = kalman_predict(s);

  auto o = oracle::kf_init(5, 5, 1, 10);
  o = oracle::kf_predict(o);
  o = oracle::kf_update(o, {15, 5, 1, 10});
  o = oracle::kf_predict(o);

  EXPECT_GT(s.mean(0), 10.0);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(s.mean(i), o.x[static_cast<std::size_t>(i)], 1e-9);
}

TEST(KalmanTest, ZeroInnovationKeepsPosition) {
  const MotionState prior = kalman_predict(kalman_init({3, 4, 12, 24}));
  const MotionState post = kalman_update(prior, prior.box());
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(post.mean(i), prior.mean(i), 1e-9);
}

TEST(KalmanTest, NoiselessMeasurementIsTrusted) {
  KalmanParams p;
  p.measurement_noise_scale = 1e-9;
  const MotionState prior = kalman_predict(kalman_init({0, 0, 10, 20}, p), p);
  const BoundingBox z{7, -3, 11, 19};
  const MotionState post = kalman_update(prior, z, p);
  const MeasurementVector m = to_measurement(z);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(post.mean(i), m(i), 1e-6);
}

TEST(KalmanTest, RandomSequencesMatchTextbookRecursion) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    BoundingBox truth{500 + 100 * u(rng), 400 + 100 * u(rng), 30 + 10 * u(rng), 50 + 20 * u(rng)};
    MotionState s = kalman_init(truth);
    auto o = oracle::kf_init(truth.x + truth.w / 2, truth.y + truth.h / 2, truth.w / truth.h, truth.h);
    for (int step = 0; step < 100; ++step) {
      s = kalman_predict(s);
      o = oracle::kf_predict(o);
      truth.x += 2 + u(rng);
      truth.y += 0.5 * u(rng);
      if (step % 7 == 3) continue;  // occasional missed measurement
      const BoundingBox z{truth.x + u(rng), truth.y + u(rng), truth.w + 0.5 * u(rng), truth.h + 0.5 * u(rng)};
      s = kalman_update(s, z);
      o = oracle::kf_update(o, {z.x + z.w / 2, z.y + z.h / 2, z.w / z.h, z.h});
    }
    for (int i = 0; i < 8; ++i) {
      EXPECT_NEAR(s.mean(i), o.x[static_cast<std::size_t>(i)], 1e-9);
      for (int j = 0; j < 8; ++j) {
        EXPECT_NEAR(s.covariance(i, j), o.p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 1e-9);
      }
    }
  }
}

TEST(KalmanTest, CovarianceStaysPositiveSemidefinite) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 5; ++trial) {
    MotionState s = kalman_init({100, 100, 20, 40});
    for (int step = 0; step < 1000; ++step) {
      const double r = u(rng);
      if (r < -0.3) {
        s = kalman_predict(s);
      } else if (r < 0.6) {
        const BoundingBox b = s.box();
        s = kalman_update(s, {b.x + 3 * u(rng), b.y + 3 * u(rng), b.w * (1 + 0.05 * u(rng)), b.h * (1 + 0.05 * u(rng))});
      } else {
        const auto m = AffineTransform::rotation(0.05 * u(rng), {960, 540}).compose(
            AffineTransform::translation(5 * u(rng), 5 * u(rng)));
        s = warp_motion_state(s, m);
      }
      ASSERT_TRUE(s.covariance.isApprox(s.covariance.transpose(), 1e-12));
      ASSERT_GE(min_eigenvalue(s.covariance), -1e-9);
    }
  }
}

TEST(AffineTest, IdentityLeavesBoxUnchanged) {
  const BoundingBox b{1.25, -3.5, 7, 9};
  EXPECT_EQ(apply_affine(b, AffineTransform::identity()), b);
}

TEST(AffineTest, TranslationShiftsBox) {
  EXPECT_EQ(apply_affine({0, 0, 10, 10}, AffineTransform::translation(5, -3)), (BoundingBox{5, -3, 10, 10}));
}

TEST(AffineTest, QuarterTurnHull) {
  // Corners (10,0),(14,0),(10,2),(14,2) map to (0,10),(0,14),(-2,10),(-2,14).
  const BoundingBox out = apply_affine({10, 0, 4, 2}, AffineTransform::rotation(std::numbers::pi / 2));
  expect_box_near(out, {-2, 10, 2, 4}, 1e-12);
}

TEST(AffineTest, DegenerateTransformRejected) {
  AffineTransform z;
  z.a = z.d = 0;
  EXPECT_TRUE(z.is_degenerate());
  EXPECT_THROW(apply_affine({0, 0, 1, 1}, z), DegenerateTransformError);
  EXPECT_THROW(z.inverse(), DegenerateTransformError);
}

TEST(AffineTest, ComposeAndInverse) {
  const auto r = AffineTransform::rotation(0.3, {10, 20});
  const auto t = AffineTransform::translation(4, -2);
  const auto rt = r.compose(t);
  const Point2 p{3, 7};
  const Point2 expect = r.apply(t.apply(p));
  EXPECT_NEAR(rt.apply(p).x, expect.x, 1e-12);
  EXPECT_NEAR(rt.apply(p).y, expect.y, 1e-12);
  const Point2 back = rt.inverse().apply(rt.apply(p));
  EXPECT_NEAR(back.x, p.x, 1e-12);
  EXPECT_NEAR(back.y, p.y, 1e-12);
  EXPECT_NEAR(r.apply({10, 20}).x, 10, 1e-12);  // pivot is fixed
}

TEST(WarpTest, IdentityIsNoOp) {
  MotionState s = kalman_predict(kalman_init({5, 6, 7, 8}));
  s.mean(4) = 1.5;
  const MotionState w = warp_motion_state(s, AffineTransform::identity());
  EXPECT_EQ(w.mean, s.mean);
  EXPECT_EQ(w.covariance, s.covariance);
}

TEST(WarpTest, TranslationShiftsCenterOnly) {
  const MotionState s = kalman_init({0, 0, 10, 10});
  const MotionState w = warp_motion_state(s, AffineTransform::translation(5, 0));
  EXPECT_DOUBLE_EQ(w.mean(0), s.mean(0) + 5);
  EXPECT_DOUBLE_EQ(w.mean(1), s.mean(1));
  EXPECT_EQ(w.covariance, s.covariance);
}

TEST(WarpTest, UniformScaleDoublesHeight) {
  AffineTransform m;
  m.a = m.d = 2;
  const MotionState w = warp_motion_state(kalman_init({0, 0, 10, 10}), m);
  EXPECT_DOUBLE_EQ(w.mean(3), 20);
  EXPECT_DOUBLE_EQ(w.mean(2), 1);
}

TEST(WarpTest, InverseRestoresMean) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) {
    MotionState s = kalman_init({300 * u(rng), 300 * u(rng), 20 + 5 * u(rng), 30 + 5 * u(rng)});
    for (int k = 4; k < 8; ++k) s.mean(k) = u(rng);
    AffineTransform m = AffineTransform::rotation(u(rng), {u(rng) * 100, u(rng) * 100});
    m.tx += 10 * u(rng);
    const MotionState back = warp_motion_state(warp_motion_state(s, m), m.inverse());
    for (int k = 0; k < 8; ++k) EXPECT_NEAR(back.mean(k), s.mean(k), 1e-6);
  }
}

TEST(EstimateAffineTest, RecoversTranslation) {
  std::mt19937_64 rng(1);
  const std::vector<Point2> prev{{0, 0}, {100, 0}, {0, 80}, {50, 40}, {200, 300}};
  std::vector<Point2> cur;
  for (auto p : prev) cur.push_back({p.x + 7, p.y - 2});
  const AffineTransform m = estimate_affine(prev, cur, rng);
  EXPECT_NEAR(m.a, 1, 1e-6);
  EXPECT_NEAR(m.b, 0, 1e-6);
  EXPECT_NEAR(m.tx, 7, 1e-6);
  EXPECT_NEAR(m.c, 0, 1e-6);
  EXPECT_NEAR(m.d, 1, 1e-6);
  EXPECT_NEAR(m.ty, -2, 1e-6);
}

TEST(EstimateAffineTest, IdenticalPointsGiveIdentity) {
  std::mt19937_64 rng(1);
  const std::vector<Point2> pts{{10, 10}, {50, 20}, {30, 70}, {90, 90}};
  const AffineTransform m = estimate_affine(pts, pts, rng);
  EXPECT_NEAR(m.a, 1, 1e-9);
  EXPECT_NEAR(m.d, 1, 1e-9);
  EXPECT_NEAR(m.b, 0, 1e-9);
  EXPECT_NEAR(m.c, 0, 1e-9);
  EXPECT_NEAR(m.tx, 0, 1e-9);
  EXPECT_NEAR(m.ty, 0, 1e-9);
}

TEST(EstimateAffineTest, RecoversRotation) {
  std::mt19937_64 rng(1);
  const double th = std::numbers::pi / 6;
  const auto truth = AffineTransform::rotation(th);
  const std::vector<Point2> prev{{10, 0}, {0, 10}, {-30, 5}, {40, 40}, {7, -20}};
  std::vector<Point2> cur;
  for (auto p : prev) cur.push_back(truth.apply(p));
  const AffineTransform m = estimate_affine(prev, cur, rng);
  EXPECT_NEAR(m.a, std::cos(th), 1e-6);
  EXPECT_NEAR(m.b, -std::sin(th), 1e-6);
  EXPECT_NEAR(m.c, std::sin(th), 1e-6);
  EXPECT_NEAR(m.d, std::cos(th), 1e-6);
}

TEST(EstimateAffineTest, RecoversRandomAffinesWithOutliers) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    AffineTransform truth;
    truth.a = 1 + 0.2 * u(gen);
    truth.b = 0.2 * u(gen);
    truth.c = 0.2 * u(gen);
    truth.d = 1 + 0.2 * u(gen);
    truth.tx = 20 * u(gen);
    truth.ty = 20 * u(gen);
    const int n = 3 + trial % 30;
    std::vector<Point2> prev;
    std::vector<Point2> cur;
    for (int i = 0; i < n; ++i) {
      const Point2 p{960 + 500 * u(gen), 540 + 400 * u(gen)};
      prev.push_back(p);
      cur.push_back(truth.apply(p));
    }
    // A few gross outliers once there is enough support.
    if (n >= 10) {
      for (int k = 0; k < n / 5; ++k) cur[static_cast<std::size_t>(k)].x += 200;
    }
    std::mt19937_64 rng(static_cast<std::uint64_t>(trial));
    const AffineTransform m = estimate_affine(prev, cur, rng);
    EXPECT_NEAR(m.a, truth.a, 1e-6);
    EXPECT_NEAR(m.b, truth.b, 1e-6);
    EXPECT_NEAR(m.c, truth.c, 1e-6);
    EXPECT_NEAR(m.d, truth.d, 1e-6);
    EXPECT_NEAR(m.tx, truth.tx, 1e-6);
    EXPECT_NEAR(m.ty, truth.ty, 1e-6);
  }
}

TEST(EstimateAffineTest, FailsOnTooFewOrCollinearPoints) {
  std::mt19937_64 rng(1);
  const std::vector<Point2> two{{0, 0}, {1, 1}};
  EXPECT_THROW(estimate_affine(two, two, rng), AffineEstimationError);
  const std::vector<Point2> line{{0, 0}, {10, 0}, {20, 0}, {30, 0}};
  EXPECT_THROW(estimate_affine(line, line, rng), AffineEstimationError);
}

TEST(EstimateAffineTest, SameSeedSameResult) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0, 1000);
  std::vector<Point2> prev;
  std::vector<Point2> cur;
  for (int i = 0; i < 40; ++i) {
    prev.push_back({u(gen), u(gen)});
    cur.push_back({prev.back().x + 3 + u(gen) / 500, prev.back().y - 1});
  }
  std::mt19937_64 r1(77);
  std::mt19937_64 r2(77);
  EXPECT_EQ(estimate_affine(prev, cur, r1), estimate_affine(prev, cur, r2));
}

TEST(RotationDescriptorTest, ThreeFourFiveTriangle) {
  const std::vector<Point2> others{{30, 0}, {0, 40}};
  const auto v = rotation_descriptor({0, 0}, others, 100);
  ASSERT_TRUE(v);
  EXPECT_NEAR(v->alpha, std::atan(3.0 / 4.0), 1e-12);
  EXPECT_NEAR(v->beta, std::atan(4.0 / 3.0), 1e-12);
  EXPECT_NEAR(v->l_norm, 0.5, 1e-12);
  EXPECT_NEAR(v->alpha, 0.6435, 1e-4);
  EXPECT_NEAR(v->beta, 0.9273, 1e-4);
}

TEST(RotationDescriptorTest, AbsentWithoutNeighbors) {
  const std::vector<Point2> far{{300, 0}, {0, 400}};
  EXPECT_FALSE(rotation_descriptor({0, 0}, far, 100));
  const std::vector<Point2> one{{30, 0}};
  EXPECT_FALSE(rotation_descriptor({0, 0}, one, 100));
}

TEST(RotationDescriptorTest, AbsentWhenCollinear) {
  const std::vector<Point2> others{{10, 0}, {20, 0}};
  EXPECT_FALSE(rotation_descriptor({0, 0}, others, 100));
}

TEST(RotationDescriptorTest, SubjectItselfIsIgnored) {
  const std::vector<Point2> others{{0, 0}, {30, 0}, {0, 40}};
  const auto v = rotation_descriptor({0, 0}, others, 100);
  ASSERT_TRUE(v);
  EXPECT_NEAR(v->l_norm, 0.5, 1e-12);
}

TEST(RotationDescriptorTest, RigidMotionInvariance) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1, 1);
  int present = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Point2 subject{500 + 300 * u(rng), 500 + 300 * u(rng)};
    std::vector<Point2> others;
    for (int k = 0; k < 2 + trial % 6; ++k) others.push_back({subject.x + 90 * u(rng), subject.y + 90 * u(rng)});
    const auto m = AffineTransform::rotation(std::numbers::pi * u(rng), {960, 540})
                       .compose(AffineTransform::translation(200 * u(rng), 200 * u(rng)));
    std::vector<Point2> moved;
    for (auto p : others) moved.push_back(m.apply(p));
    const auto a = rotation_descriptor(subject, others, 100);
    const auto b = rotation_descriptor(m.apply(subject), moved, 100);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (!a) continue;
    ++present;
    EXPECT_NEAR(a->alpha, b->alpha, 1e-9);
    EXPECT_NEAR(a->beta, b->beta, 1e-9);
    EXPECT_NEAR(a->l_norm, b->l_norm, 1e-9);
    EXPECT_LE(rotation_cost(a, b), 1e-9);
  }
  EXPECT_GT(present, 300);
}

TEST(RotationCostTest, Values) {
  const RotationVector a{0.6435, 0.9273, 0.5};
  const RotationVector b{0.9273, 0.6435, 0.5};
  EXPECT_NEAR(rotation_cost(a, a), 0.0, 1e-15);
  EXPECT_EQ(rotation_cost(std::nullopt, a), 0.0);
  EXPECT_EQ(rotation_cost(a, std::nullopt), 0.0);
  const double expected =
      1 - (2 * 0.6435 * 0.9273 + 0.25) / (0.6435 * 0.6435 + 0.9273 * 0.9273 + 0.25);
  EXPECT_NEAR(rotation_cost(a, b), expected, 1e-12);
}

TEST(PredictTracksTest, StationaryTrackWithIdentity) {
  std::vector<Track> tracks(1);
  const BoundingBox b{100, 50, 20, 40};
  tracks[0].motion = kalman_init(b);
  const auto out = predict_tracks(tracks, AffineTransform::identity());
  expect_box_near(out[0], b, 1e-12);
}

TEST(PredictTracksTest, TranslationIsPassedThrough) {
  std::vector<Track> tracks(1);
  tracks[0].motion = kalman_init({100, 50, 20, 40});
  const auto out = predict_tracks(tracks, AffineTransform::translation(12, 0));
  expect_box_near(out[0], {112, 50, 20, 40}, 1e-12);
}

TEST(PredictTracksTest, WarpThenPredict) {
  std::vector<Track> tracks(1);
  tracks[0].motion = kalman_init({100, 50, 20, 40});
  tracks[0].motion.mean(4) = 3;
  const auto out = predict_tracks(tracks, AffineTransform::translation(12, 0));
  EXPECT_NEAR(center(out[0]).x, 110 + 15, 1e-12);
  EXPECT_NEAR(center(out[0]).y, 70, 1e-12);
}
