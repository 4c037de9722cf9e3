#pragma once

// Dual motion-based prediction: a constant-velocity Kalman filter for object
// motion, affine camera-motion compensation for drone translation, and the
// triangle rotation descriptor used by the rotation cost.

#include <Eigen/Dense>
#include <optional>
#include <random>
#include <span>

#include "drone_assoc/core.hpp"

namespace drone_assoc {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateCovariance = Eigen::Matrix<double, 8, 8>;
using MeasurementVector = Eigen::Matrix<double, 4, 1>;

// Filter state over [cx, cy, a, h, vcx, vcy, va, vh], with a = w / h.
struct MotionState {
  StateVector mean = StateVector::Zero();
  StateCovariance covariance = StateCovariance::Identity();

  // Box described by the position part of the mean. Aspect and height are
  // floored at tiny positive values so the result is always a valid box.
  BoundingBox box() const;
};

// Noise standard deviations scale with the box height.
struct KalmanParams {
  double std_weight_position = 1.0 / 20.0;
  double std_weight_velocity = 1.0 / 160.0;
  // Multiplies the measurement noise standard deviations; 0 trusts the
  // measurement completely.
  double measurement_noise_scale = 1.0;
};

MeasurementVector to_measurement(const BoundingBox& b);

MotionState kalman_init(const BoundingBox& b, const KalmanParams& params = {});
MotionState kalman_predict(const MotionState& s, const KalmanParams& params = {});
MotionState kalman_update(const MotionState& s, const BoundingBox& b,
                          const KalmanParams& params = {});

// Row-major [[a, b, tx], [c, d, ty]] mapping previous-frame pixels to
// current-frame pixels.
struct AffineTransform {
  double a = 1.0, b = 0.0, tx = 0.0;
  double c = 0.0, d = 1.0, ty = 0.0;

  static AffineTransform identity() { return {}; }
  static AffineTransform translation(double dx, double dy);
  // Counter-clockwise rotation by `radians` about `pivot` (in image axes).
  static AffineTransform rotation(double radians, Point2 pivot = {});

  double determinant() const { return a * d - b * c; }
  // sqrt(|det|): the isotropic scale of the linear part.
  double scale() const;
  bool is_degenerate() const;
  bool is_identity() const;

  Point2 apply(Point2 p) const;
  Point2 apply_linear(Point2 v) const;
  AffineTransform inverse() const;
  // (this * first)(p) == this->apply(first.apply(p)).
  AffineTransform compose(const AffineTransform& first) const;

  friend bool operator==(const AffineTransform&, const AffineTransform&) = default;
};

// Axis-aligned hull of the four transformed corners. Throws
// DegenerateTransformError when |det| <= 1e-9.
BoundingBox apply_affine(const BoundingBox& b, const AffineTransform& m);

// Moves the filter into the current frame's coordinates: center through m,
// center velocity through the linear part, height (and its rate) by m.scale(),
// covariance conjugated by the same block-diagonal map.
MotionState warp_motion_state(const MotionState& s, const AffineTransform& m);

struct AffineEstimationOptions {
  double inlier_threshold = 3.0;
  int max_iterations = 100;
};

// Robust fit of an affine from matched point pairs: minimal three-point
// hypotheses (enumerated when few, otherwise sampled from `rng`), followed by
// least-squares refinement on the consensus set. Throws AffineEstimationError
// for fewer than three pairs or a collinear configuration.
AffineTransform estimate_affine(std::span<const Point2> prev_points,
                                std::span<const Point2> cur_points, std::mt19937_64& rng,
                                const AffineEstimationOptions& options = {});

// Two smallest triangle angles (ascending) and the side opposite the largest
// angle, divided by the neighbor radius.
struct RotationVector {
  double alpha = 0.0;
  double beta = 0.0;
  double l_norm = 0.0;
};

// Triangle formed by `subject`, its nearest and its farthest neighbor among
// `others` within (0, radius]. Absent with fewer than two qualifying
// neighbors or when the triangle area is below 1e-6 px^2.
std::optional<RotationVector> rotation_descriptor(Point2 subject, std::span<const Point2> others,
                                                  double radius);

// 1 - cosine similarity of the two descriptors, clamped to [0, 1]; 0 when
// either side is absent.
double rotation_cost(const std::optional<RotationVector>& a, const std::optional<RotationVector>& b);

}  // namespace drone_assoc
