#include "rtv/losses.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "rtv/errors.hpp"
#include "rtv/geometry.hpp"

namespace rtv {

namespace {

constexpr double kMinHomogeneousW = 1e-12;
constexpr double kMinSingularGap = 1e-9;
constexpr double kMinDepth = 1e-12;
constexpr double kMinWeight = 1e-12;

struct ViewCache {
  detail::ConditionedView cond;
  Mat3 KR;
  Point3 Kt;
  BBox2 bbox;
  Point2 half;    // half extents of the bbox
  Point2 center;  // bbox center
};

std::vector<ViewCache> build_view_caches(const CameraRig& rig,
                                         const MultiViewDetections& det) {
  std::vector<ViewCache> caches(rig.size());
  for (std::size_t v = 0; v < rig.size(); ++v) {
    ViewCache& c = caches[v];
    c.cond = detail::condition_view(rig.cameras[v]);
    c.KR = rig.cameras[v].K * rig.cameras[v].R;
    c.Kt = rig.cameras[v].K * rig.cameras[v].t;
    c.bbox = det.view_bbox[v];
    c.half = Point2(0.5 * c.bbox.width(), 0.5 * c.bbox.height());
    c.center = c.bbox.center();
  }
  return caches;
}

struct JointEval {
  bool ok = false;
  const char* skip_reason = nullptr;
  double loss = 0.0;
  Point3 X = Point3::Zero();
  std::vector<int> views;                 // usable views for this joint
  std::vector<Point2> grad_direct;        // parallel to views
  std::vector<Point2> grad_through;
};

/// Evaluates one joint: weighted triangulation, reprojection residuals,
/// and (optionally) the two gradient paths.
JointEval eval_joint(const std::vector<ViewCache>& caches,
                     const MultiViewDetections& det, const WeightGrid& weights,
                     int joint, bool with_grad) {
  JointEval ev;
  const std::size_t n_views = det.view_count();

  std::vector<double> w;
  std::vector<Point2> pixels;   // detections, pixel space
  std::vector<Point2> normed;   // detections, normalized space
  for (std::size_t v = 0; v < n_views; ++v) {
    if (!det.valid[v][joint]) continue;
    const double wv = weights.empty() ? 1.0 : weights[v][joint];
    if (wv < kMinWeight) continue;
    ev.views.push_back(static_cast<int>(v));
    w.push_back(wv);
    normed.push_back(det.points[v][joint]);
    pixels.push_back(denormalize_from_bbox(det.points[v][joint], caches[v].bbox));
  }
  const std::size_t m = ev.views.size();
  if (m < 2) {
    ev.skip_reason = "insufficient_views";
    return ev;
  }

  Eigen::MatrixX4d A(2 * m, 4);
  for (std::size_t i = 0; i < m; ++i)
    detail::dlt_rows(caches[ev.views[i]].cond, pixels[i], w[i],
                     A.middleRows<2>(2 * static_cast<Eigen::Index>(i)));

  const Eigen::Matrix4d M = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(M);
  if (eig.info() != Eigen::Success) {
    ev.skip_reason = "eigensolver_failed";
    return ev;
  }
  const Eigen::Vector4d q = eig.eigenvectors().col(0);
  if (std::abs(q.w()) < kMinHomogeneousW) {
    ev.skip_reason = "degenerate_geometry";
    return ev;
  }
  ev.X = q.head<3>() / q.w();

  // Reproject and accumulate residuals in normalized coordinates.
  std::vector<Point2> residual(m);
  std::vector<Eigen::Vector3d> uvw(m);
  for (std::size_t i = 0; i < m; ++i) {
    const ViewCache& c = caches[ev.views[i]];
    uvw[i] = c.KR * ev.X + c.Kt;
    if (uvw[i].z() <= kMinDepth) {
      ev.skip_reason = "behind_camera";
      return ev;
    }
    const Point2 reproj_px = uvw[i].hnormalized();
    const Point2 reproj_n((reproj_px.x() - c.center.x()) / c.half.x(),
                          (reproj_px.y() - c.center.y()) / c.half.y());
    residual[i] = normed[i] - reproj_n;
    ev.loss += w[i] * residual[i].squaredNorm();
  }

  if (!with_grad) {
    ev.ok = true;
    return ev;
  }

  Eigen::Vector4d lambda = eig.eigenvalues().cwiseMax(0.0);
  if (std::sqrt(lambda(1)) - std::sqrt(lambda(0)) < kMinSingularGap) {
    ev.skip_reason = "gradient_degenerate";
    return ev;
  }

  // Adjoint of the loss with respect to the triangulated point: the
  // reprojection Jacobians pull the residuals back to 3D.
  Point3 G3 = Point3::Zero();
  for (std::size_t i = 0; i < m; ++i) {
    const ViewCache& c = caches[ev.views[i]];
    const double z = uvw[i].z();
    const double u = uvw[i].x() / z;
    const double v = uvw[i].y() / z;
    Eigen::Matrix<double, 2, 3> J_px;
    J_px.row(0) = (c.KR.row(0) - u * c.KR.row(2)) / z;
    J_px.row(1) = (c.KR.row(1) - v * c.KR.row(2)) / z;
    Eigen::Matrix<double, 2, 3> J_n;
    J_n.row(0) = J_px.row(0) / c.half.x();
    J_n.row(1) = J_px.row(1) / c.half.y();
    G3 += J_n.transpose() * (-2.0 * w[i] * residual[i]);
  }

  // Derivative of the smallest eigenvector of A^T A: perturbing one
  // stacked row g in A gives, for the solution q and partners v_k,
  //   dq = sum_k v_k [(Av_0)_r (g.v_k) + (Av_k)_r (g.v_0)] / (l_0 - l_k).
  Eigen::Matrix<double, Eigen::Dynamic, 4> Av(2 * m, 4);
  for (int k = 0; k < 4; ++k) Av.col(k) = A * eig.eigenvectors().col(k);

  ev.grad_direct.resize(m);
  ev.grad_through.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const ViewCache& c = caches[ev.views[i]];
    ev.grad_direct[i] = 2.0 * w[i] * residual[i];

    const Eigen::RowVector4d g = w[i] * c.cond.P.row(2);
    Eigen::Matrix<double, 3, 2> dX_dn;  // vs the normalized detection
    for (int axis = 0; axis < 2; ++axis) {
      const Eigen::Index r = 2 * static_cast<Eigen::Index>(i) + axis;
      Eigen::Vector4d dq = Eigen::Vector4d::Zero();
      for (int k = 1; k < 4; ++k) {
        const double num = Av(r, 0) * g.dot(eig.eigenvectors().col(k)) +
                           Av(r, k) * g.dot(q);
        dq += eig.eigenvectors().col(k) * (num / (lambda(0) - lambda(k)));
      }
      const Point3 dX = (dq.head<3>() - ev.X * dq.w()) / q.w();
      // Chain: normalized -> pixel -> conditioned coordinate.
      const double to_cond = c.cond.scale * (axis == 0 ? c.half.x() : c.half.y());
      dX_dn.col(axis) = dX * to_cond;
    }
    ev.grad_through[i] = dX_dn.transpose() * G3;
  }
  ev.ok = true;
  return ev;
}

void check_weights(const MultiViewDetections& det, const WeightGrid& weights) {
  if (weights.empty()) return;
  if (weights.size() != det.view_count())
    throw ConfigInvalid("loss weights: view count mismatch");
  for (std::size_t v = 0; v < weights.size(); ++v)
    if (weights[v].size() != det.joint_count())
      throw ConfigInvalid("loss weights: joint count mismatch");
}

}  // namespace

std::vector<std::vector<Point2>> TriLossResult::grad_total(double alpha) const {
  std::vector<std::vector<Point2>> total(grad_direct.size());
  for (std::size_t v = 0; v < grad_direct.size(); ++v) {
    total[v].resize(grad_direct[v].size());
    for (std::size_t j = 0; j < grad_direct[v].size(); ++j)
      total[v][j] = alpha * grad_direct[v][j] + (1.0 - alpha) * grad_through[v][j];
  }
  return total;
}

double tri_loss(const CameraRig& rig, const MultiViewDetections& detections,
                const WeightGrid& weights) {
  detections.validate();
  check_weights(detections, weights);
  if (detections.view_count() != rig.size())
    throw ConfigInvalid("tri_loss: detections do not pair with rig cameras");

  const std::vector<ViewCache> caches = build_view_caches(rig, detections);
  double total = 0;
  for (std::size_t j = 0; j < detections.joint_count(); ++j) {
    const JointEval ev =
        eval_joint(caches, detections, weights, static_cast<int>(j), false);
    if (ev.ok) total += ev.loss;
  }
  return total;
}

TriLossResult tri_loss_grad(const CameraRig& rig,
                            const MultiViewDetections& detections,
                            const WeightGrid& weights) {
  detections.validate();
  check_weights(detections, weights);
  if (detections.view_count() != rig.size())
    throw ConfigInvalid("tri_loss_grad: detections do not pair with rig cameras");

  const std::size_t n_views = detections.view_count();
  const std::size_t n_joints = detections.joint_count();
  const std::vector<ViewCache> caches = build_view_caches(rig, detections);

  TriLossResult res;
  res.grad_direct.assign(n_views, std::vector<Point2>(n_joints, Point2::Zero()));
  res.grad_through.assign(n_views, std::vector<Point2>(n_joints, Point2::Zero()));
  res.triangulated.assign(n_joints, std::nullopt);

  for (std::size_t j = 0; j < n_joints; ++j) {
    const JointEval ev =
        eval_joint(caches, detections, weights, static_cast<int>(j), true);
    if (!ev.ok) {
      res.skipped.push_back({static_cast<int>(j), ev.skip_reason});
      continue;
    }
    res.loss += ev.loss;
    res.triangulated[j] = ev.X;
    for (std::size_t i = 0; i < ev.views.size(); ++i) {
      res.grad_direct[ev.views[i]][j] = ev.grad_direct[i];
      res.grad_through[ev.views[i]][j] = ev.grad_through[i];
    }
  }
  return res;
}

void DescentConfig::validate() const {
  if (!(alpha >= 0 && alpha <= 1)) throw ConfigInvalid("descent alpha must be in [0,1]");
  if (!(step_size > 0)) throw ConfigInvalid("descent step_size must be positive");
  if (n_steps <= 0) throw ConfigInvalid("descent n_steps must be positive");
}

std::vector<DescentSample> descend_detections(const CameraRig& rig,
                                              MultiViewDetections detections,
                                              const std::vector<Point3>& ground_truth,
                                              const DescentConfig& config) {
  config.validate();
  detections.validate();
  if (ground_truth.size() != detections.joint_count())
    throw JointCountMismatch("descend_detections: ground truth joint count differs");

  std::vector<DescentSample> trajectory;
  trajectory.reserve(config.n_steps);

  for (int step = 0; step < config.n_steps; ++step) {
    const TriLossResult res = tri_loss_grad(rig, detections);

    DescentSample sample;
    sample.loss = res.loss;

    double err = 0;
    std::size_t counted = 0;
    for (std::size_t j = 0; j < ground_truth.size(); ++j) {
      if (!res.triangulated[j]) continue;
      err += (*res.triangulated[j] - ground_truth[j]).norm();
      ++counted;
    }
    sample.mpjpe_mm = counted ? 1000.0 * err / static_cast<double>(counted) : 0.0;

    double drift = 0;
    std::size_t n_obs = 0;
    for (std::size_t v = 0; v < detections.view_count(); ++v) {
      const BBox2& box = detections.view_bbox[v];
      for (std::size_t j = 0; j < detections.joint_count(); ++j) {
        if (!detections.valid[v][j]) continue;
        const Point2 px = denormalize_from_bbox(detections.points[v][j], box);
        drift += (px - box.center()).norm();
        ++n_obs;
      }
    }
    sample.center_drift_px = n_obs ? drift / static_cast<double>(n_obs) : 0.0;
    trajectory.push_back(sample);

    if (step + 1 == config.n_steps) break;
    const std::vector<std::vector<Point2>> grad = res.grad_total(config.alpha);
    for (std::size_t v = 0; v < detections.view_count(); ++v)
      for (std::size_t j = 0; j < detections.joint_count(); ++j)
        if (detections.valid[v][j])
          detections.points[v][j] -= config.step_size * grad[v][j];
  }
  return trajectory;
}

}  // namespace rtv
