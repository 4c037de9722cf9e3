#include "drone_assoc/motion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "drone_assoc/error.hpp"

namespace drone_assoc {

namespace {

constexpr double kDegenerateDet = 1e-9;
constexpr double kMinTriangleArea = 1e-6;

using MeasurementMatrix = Eigen::Matrix<double, 4, 8>;
using MeasurementCovariance = Eigen::Matrix<double, 4, 4>;

MeasurementMatrix measurement_matrix() {
  MeasurementMatrix h = MeasurementMatrix::Zero();
  for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
  return h;
}

Eigen::Matrix<double, 8, 8> transition_matrix() {
  Eigen::Matrix<double, 8, 8> f = Eigen::Matrix<double, 8, 8>::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
  return f;
}

double noise_height(const StateVector& mean) { return std::max(std::abs(mean(3)), 1e-3); }

StateCovariance symmetrized(const StateCovariance& p) { return 0.5 * (p + p.transpose()); }

}  // namespace

BoundingBox MotionState::box() const {
  const double aspect = std::max(mean(2), 1e-6);
  const double h = std::max(mean(3), 1e-3);
  const double w = aspect * h;
  return {mean(0) - w / 2.0, mean(1) - h / 2.0, w, h};
}

MeasurementVector to_measurement(const BoundingBox& b) {
  const Point2 c = center(b);
  return {c.x, c.y, b.w / b.h, b.h};
}

MotionState kalman_init(const BoundingBox& b, const KalmanParams& params) {
  MotionState s;
  s.mean.head<4>() = to_measurement(b);
  s.mean.tail<4>().setZero();
  const double h = b.h;
  const double sp = params.std_weight_position;
  const double sv = params.std_weight_velocity;
  StateVector std_dev;
  std_dev << 2 * sp * h, 2 * sp * h, 1e-2, 2 * sp * h, 10 * sv * h, 10 * sv * h, 1e-5,
      10 * sv * h;
  s.covariance = std_dev.array().square().matrix().asDiagonal();
  return s;
}

MotionState kalman_predict(const MotionState& s, const KalmanParams& params) {
  static const Eigen::Matrix<double, 8, 8> f = transition_matrix();
  const double h = noise_height(s.mean);
  const double sp = params.std_weight_position;
  const double sv = params.std_weight_velocity;
  StateVector std_dev;
  std_dev << sp * h, sp * h, 1e-2, sp * h, sv * h, sv * h, 1e-5, sv * h;
  const StateCovariance q = std_dev.array().square().matrix().asDiagonal();

  MotionState out;
  out.mean = f * s.mean;
  out.covariance = symmetrized(f * s.covariance * f.transpose() + q);
  return out;
}

MotionState kalman_update(const MotionState& s, const BoundingBox& b, const KalmanParams& params) {
  static const MeasurementMatrix hm = measurement_matrix();
  const double h = noise_height(s.mean);
  const double sp = params.std_weight_position * params.measurement_noise_scale;
  Eigen::Vector4d std_dev(sp * h, sp * h, 1e-1 * params.measurement_noise_scale, sp * h);
  const MeasurementCovariance r = std_dev.array().square().matrix().asDiagonal();

  const MeasurementCovariance innovation_cov = hm * s.covariance * hm.transpose() + r;
  const Eigen::Matrix<double, 8, 4> pht = s.covariance * hm.transpose();
  // K = P H^T S^-1, solved as S K^T = H P.
  const Eigen::Matrix<double, 8, 4> gain =
      innovation_cov.ldlt().solve(pht.transpose()).transpose();
  const MeasurementVector innovation = to_measurement(b) - hm * s.mean;

  MotionState out;
  out.mean = s.mean + gain * innovation;
  out.covariance = symmetrized(s.covariance - gain * innovation_cov * gain.transpose());
  return out;
}

AffineTransform AffineTransform::translation(double dx, double dy) {
  AffineTransform m;
  m.tx = dx;
  m.ty = dy;
  return m;
}

AffineTransform AffineTransform::rotation(double radians, Point2 pivot) {
  const double cs = std::cos(radians);
  const double sn = std::sin(radians);
  AffineTransform m;
  m.a = cs;
  m.b = -sn;
  m.c = sn;
  m.d = cs;
  m.tx = pivot.x - (cs * pivot.x - sn * pivot.y);
  m.ty = pivot.y - (sn * pivot.x + cs * pivot.y);
  return m;
}

double AffineTransform::scale() const { return std::sqrt(std::abs(determinant())); }

bool AffineTransform::is_degenerate() const {
  const double det = determinant();
  return !std::isfinite(det) || std::abs(det) <= kDegenerateDet || !std::isfinite(tx) ||
         !std::isfinite(ty);
}

bool AffineTransform::is_identity() const { return *this == identity(); }

Point2 AffineTransform::apply(Point2 p) const {
  return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty};
}

Point2 AffineTransform::apply_linear(Point2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

AffineTransform AffineTransform::inverse() const {
  if (is_degenerate()) throw DegenerateTransformError("cannot invert a degenerate affine transform");
  const double det = determinant();
  AffineTransform inv;
  inv.a = d / det;
  inv.b = -b / det;
  inv.c = -c / det;
  inv.d = a / det;
  inv.tx = -(inv.a * tx + inv.b * ty);
  inv.ty = -(inv.c * tx + inv.d * ty);
  return inv;
}

AffineTransform AffineTransform::compose(const AffineTransform& first) const {
  AffineTransform m;
  m.a = a * first.a + b * first.c;
  m.b = a * first.b + b * first.d;
  m.c = c * first.a + d * first.c;
  m.d = c * first.b + d * first.d;
  m.tx = a * first.tx + b * first.ty + tx;
  m.ty = c * first.tx + d * first.ty + ty;
  return m;
}

BoundingBox apply_affine(const BoundingBox& box, const AffineTransform& m) {
  if (m.is_degenerate()) throw DegenerateTransformError("affine transform is degenerate (|det| <= 1e-9)");
  const std::array<Point2, 4> corners{Point2{box.x, box.y}, Point2{box.right(), box.y},
                                      Point2{box.x, box.bottom()},
                                      Point2{box.right(), box.bottom()}};
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  for (const Point2& p : corners) {
    const Point2 q = m.apply(p);
    min_x = std::min(min_x, q.x);
    min_y = std::min(min_y, q.y);
    max_x = std::max(max_x, q.x);
    max_y = std::max(max_y, q.y);
  }
  return {min_x, min_y, max_x - min_x, max_y - min_y};
}

MotionState warp_motion_state(const MotionState& s, const AffineTransform& m) {
  if (m.is_degenerate()) throw DegenerateTransformError("affine transform is degenerate (|det| <= 1e-9)");
  if (m.is_identity()) return s;

  const double k = m.scale();
  Eigen::Matrix<double, 8, 8> t = Eigen::Matrix<double, 8, 8>::Zero();
  for (int base : {0, 4}) {
    t(base, base) = m.a;
    t(base, base + 1) = m.b;
    t(base + 1, base) = m.c;
    t(base + 1, base + 1) = m.d;
    t(base + 2, base + 2) = 1.0;
    t(base + 3, base + 3) = k;
  }

  MotionState out;
  out.mean = t * s.mean;
  out.mean(0) += m.tx;
  out.mean(1) += m.ty;
  out.covariance = symmetrized(t * s.covariance * t.transpose());
  return out;
}

namespace {

double triangle_area(Point2 p, Point2 q, Point2 r) {
  return 0.5 * std::abs((q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x));
}

double residual(const AffineTransform& m, Point2 from, Point2 to) { return distance(m.apply(from), to); }

bool is_collinear(std::span<const Point2> pts, std::span<const std::size_t> idx) {
  if (idx.size() < 3) return true;
  Eigen::MatrixXd centered(static_cast<Eigen::Index>(idx.size()), 2);
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i : idx) {
    mx += pts[i].x;
    my += pts[i].y;
  }
  mx /= static_cast<double>(idx.size());
  my /= static_cast<double>(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    centered(static_cast<Eigen::Index>(r), 0) = pts[idx[r]].x - mx;
    centered(static_cast<Eigen::Index>(r), 1) = pts[idx[r]].y - my;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const auto& sv = svd.singularValues();
  return !(sv(0) > 0.0) || sv(1) <= 1e-9 * sv(0);
}

// Least-squares affine on the selected pairs; the two output rows decouple.
std::optional<AffineTransform> fit_least_squares(std::span<const Point2> prev,
                                                 std::span<const Point2> cur,
                                                 std::span<const std::size_t> idx) {
  if (is_collinear(prev, idx)) return std::nullopt;
  const auto n = static_cast<Eigen::Index>(idx.size());
  // Centering conditions the design matrix for large pixel coordinates.
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i : idx) {
    mx += prev[i].x;
    my += prev[i].y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd bx(n);
  Eigen::VectorXd by(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t i = idx[static_cast<std::size_t>(r)];
    design(r, 0) = prev[i].x - mx;
    design(r, 1) = prev[i].y - my;
    design(r, 2) = 1.0;
    bx(r) = cur[i].x;
    by(r) = cur[i].y;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) return std::nullopt;
  const Eigen::Vector3d row0 = qr.solve(bx);
  const Eigen::Vector3d row1 = qr.solve(by);

  AffineTransform m;
  m.a = row0(0);
  m.b = row0(1);
  m.tx = row0(2) - row0(0) * mx - row0(1) * my;
  m.c = row1(0);
  m.d = row1(1);
  m.ty = row1(2) - row1(0) * mx - row1(1) * my;
  if (m.is_degenerate()) return std::nullopt;
  return m;
}

struct Consensus {
  std::vector<std::size_t> inliers;
  double squared_error = 0.0;
};

Consensus consensus(const AffineTransform& m, std::span<const Point2> prev,
                    std::span<const Point2> cur, double threshold) {
  Consensus out;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const double r = residual(m, prev[i], cur[i]);
    if (r <= threshold) {
      out.inliers.push_back(i);
      out.squared_error += r * r;
    }
  }
  return out;
}

bool better(const Consensus& a, const Consensus& b) {
  if (a.inliers.size() != b.inliers.size()) return a.inliers.size() > b.inliers.size();
  return a.squared_error < b.squared_error;
}

}  // namespace

AffineTransform estimate_affine(std::span<const Point2> prev_points,
                                std::span<const Point2> cur_points, std::mt19937_64& rng,
                                const AffineEstimationOptions& options) {
  if (prev_points.size() != cur_points.size()) {
    throw AffineEstimationError("estimate_affine: point sequences differ in length");
  }
  const std::size_t n = prev_points.size();
  if (n < 3) throw AffineEstimationError("estimate_affine: need at least 3 point pairs");

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  if (is_collinear(prev_points, all)) {
    throw AffineEstimationError("estimate_affine: point configuration is collinear");
  }

  // Minimal-sample hypotheses: every triple when there are few, else sampled.
  std::vector<std::array<std::size_t, 3>> samples;
  const double triples = static_cast<double>(n) * static_cast<double>(n - 1) *
                         static_cast<double>(n - 2) / 6.0;
  if (triples <= options.max_iterations) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) samples.push_back({i, j, k});
  } else {
    while (samples.size() < static_cast<std::size_t>(options.max_iterations)) {
      std::array<std::size_t, 3> s{};
      s[0] = static_cast<std::size_t>(rng() % n);
      do s[1] = static_cast<std::size_t>(rng() % n); while (s[1] == s[0]);
      do s[2] = static_cast<std::size_t>(rng() % n); while (s[2] == s[0] || s[2] == s[1]);
      samples.push_back(s);
    }
  }

  std::optional<Consensus> best;
  for (const auto& s : samples) {
    const Point2 p0 = prev_points[s[0]];
    const Point2 p1 = prev_points[s[1]];
    const Point2 p2 = prev_points[s[2]];
    const double scale = std::max({distance(p0, p1), distance(p1, p2), distance(p0, p2)});
    if (triangle_area(p0, p1, p2) <= 1e-9 * scale * scale) continue;
    const auto model = fit_least_squares(prev_points, cur_points, s);
    if (!model) continue;
    Consensus c = consensus(*model, prev_points, cur_points, options.inlier_threshold);
    if (!best || better(c, *best)) best = std::move(c);
  }
  if (!best || best->inliers.size() < 3) {
    throw AffineEstimationError("estimate_affine: no consistent hypothesis");
  }

  // Refine on the consensus set until it stops changing.
  std::optional<AffineTransform> model;
  std::vector<std::size_t> inliers = best->inliers;
  for (int round = 0; round < 10; ++round) {
    auto refit = fit_least_squares(prev_points, cur_points, inliers);
    if (!refit) break;
    Consensus c = consensus(*refit, prev_points, cur_points, options.inlier_threshold);
    if (c.inliers.size() < 3) break;
    model = refit;
    if (c.inliers == inliers) break;
    inliers = std::move(c.inliers);
  }
  if (!model) throw AffineEstimationError("estimate_affine: refinement failed on the inlier set");
  return *model;
}

std::optional<RotationVector> rotation_descriptor(Point2 subject, std::span<const Point2> others,
                                                  double radius) {
  if (!std::isfinite(subject.x) || !std::isfinite(subject.y)) return std::nullopt;
  std::optional<std::size_t> nearest;
  std::optional<std::size_t> farthest;
  double nearest_d = 0.0;
  double farthest_d = 0.0;
  for (std::size_t i = 0; i < others.size(); ++i) {
    const double d = distance(subject, others[i]);
    if (!(d > 0.0) || d > radius) continue;
    if (!nearest || d < nearest_d) {
      nearest = i;
      nearest_d = d;
    }
    // >= so that two equidistant neighbors still yield distinct vertices.
    if (!farthest || d >= farthest_d) {
      farthest = i;
      farthest_d = d;
    }
  }
  if (!nearest || !farthest || *nearest == *farthest) return std::nullopt;

  const std::array<Point2, 3> v{subject, others[*nearest], others[*farthest]};
  if (triangle_area(v[0], v[1], v[2]) < kMinTriangleArea) return std::nullopt;

  // angle[k] sits at vertex k; side[k] is the edge opposite it.
  std::array<double, 3> angle{};
  std::array<double, 3> side{};
  for (int k = 0; k < 3; ++k) {
    const Point2 p = v[static_cast<std::size_t>(k)];
    const Point2 q = v[static_cast<std::size_t>((k + 1) % 3)];
    const Point2 r = v[static_cast<std::size_t>((k + 2) % 3)];
    const double ux = q.x - p.x, uy = q.y - p.y;
    const double wx = r.x - p.x, wy = r.y - p.y;
    angle[static_cast<std::size_t>(k)] = std::atan2(std::abs(ux * wy - uy * wx), ux * wx + uy * wy);
    side[static_cast<std::size_t>(k)] = distance(q, r);
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return angle[i] < angle[j]; });
  return RotationVector{angle[order[0]], angle[order[1]], side[order[2]] / radius};
}

double rotation_cost(const std::optional<RotationVector>& a, const std::optional<RotationVector>& b) {
  if (!a || !b) return 0.0;
  const double dot = a->alpha * b->alpha + a->beta * b->beta + a->l_norm * b->l_norm;
  const double na = std::sqrt(a->alpha * a->alpha + a->beta * a->beta + a->l_norm * a->l_norm);
  const double nb = std::sqrt(b->alpha * b->alpha + b->beta * b->beta + b->l_norm * b->l_norm);
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  return std::clamp(1.0 - dot / (na * nb), 0.0, 1.0);
}

}  // namespace drone_assoc
