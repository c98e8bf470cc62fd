#include "rtv/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

namespace rtv {

namespace {

constexpr double kMinDepth = 1e-12;
constexpr double kMinHomogeneousW = 1e-12;
constexpr double kMinBaseline = 1e-6;
constexpr double kMinEffectiveWeight = 1e-12;

}  // namespace

Mat34 Camera::projection_matrix() const {
  Mat34 rt;
  rt.leftCols<3>() = R;
  rt.col(3) = t;
  return K * rt;
}

Point3 Camera::center() const { return -R.transpose() * t; }

double Camera::depth(const Point3& x_world) const {
  return (R * x_world + t).z();
}

void Camera::validate() const {
  if (width <= 0 || height <= 0)
    throw ConfigInvalid("camera image size must be positive");
  if (K(0, 0) <= 0 || K(1, 1) <= 0)
    throw ConfigInvalid("camera focal lengths must be positive");
  if (std::abs(K(1, 0)) > 0 || std::abs(K(2, 0)) > 0 || std::abs(K(2, 1)) > 0 ||
      std::abs(K(2, 2) - 1.0) > 1e-12)
    throw ConfigInvalid("camera K must be upper triangular with K(2,2) = 1");
  if ((R * R.transpose() - Mat3::Identity()).norm() > 1e-9 || R.determinant() < 0)
    throw ConfigInvalid("camera R must be a rotation matrix");
}

void CameraRig::validate() const {
  if (cameras.size() < 2)
    throw ConfigInvalid("rig needs at least two cameras");
  for (const Camera& cam : cameras) cam.validate();
  for (std::size_t a = 0; a < cameras.size(); ++a)
    for (std::size_t b = a + 1; b < cameras.size(); ++b)
      if ((cameras[a].center() - cameras[b].center()).norm() <= kMinBaseline)
        throw ConfigInvalid("rig cameras " + std::to_string(a) + " and " +
                            std::to_string(b) + " share a center");
}

void BBox2::validate() const {
  if (!(width() > 0) || !(height() > 0))
    throw EmptyBBox("bounding box must have positive width and height");
}

BBox2 BBox2::image_rect(const Camera& cam) {
  return BBox2{Point2::Zero(), Point2(cam.width, cam.height)};
}

void MultiViewDetections::validate() const {
  if (points.size() != valid.size() || points.size() != view_bbox.size())
    throw ConfigInvalid("detections: views of points, valid, view_bbox differ");
  const std::size_t joints = joint_count();
  for (std::size_t v = 0; v < points.size(); ++v) {
    if (points[v].size() != joints || valid[v].size() != joints)
      throw ConfigInvalid("detections: ragged joint counts across views");
    view_bbox[v].validate();
  }
}

Point2 project(const Camera& cam, const Point3& x_world) {
  const Point3 x_cam = cam.R * x_world + cam.t;
  if (x_cam.z() <= kMinDepth)
    throw NonPositiveDepth("point has depth " + std::to_string(x_cam.z()) +
                           " m, not in front of the camera");
  const Point3 uvw = cam.K * x_cam;
  return uvw.hnormalized();
}

namespace detail {

ConditionedView condition_view(const Camera& cam) {
  ConditionedView out;
  out.offset = Point2(0.5 * cam.width, 0.5 * cam.height);
  // RMS distance of the frame corners from the center becomes sqrt(2).
  out.scale = std::sqrt(2.0) / out.offset.norm();
  Mat3 T = Mat3::Identity();
  T(0, 0) = out.scale;
  T(1, 1) = out.scale;
  T(0, 2) = -out.scale * out.offset.x();
  T(1, 2) = -out.scale * out.offset.y();
  out.P = T * cam.projection_matrix();
  return out;
}

void dlt_rows(const ConditionedView& view, const Point2& pixel, double weight,
              Eigen::Ref<Eigen::Matrix<double, 2, 4>> rows) {
  const Point2 c = view.apply(pixel);
  rows.row(0) = weight * (c.x() * view.P.row(2) - view.P.row(0));
  rows.row(1) = weight * (c.y() * view.P.row(2) - view.P.row(1));
}

Point3 dehomogenize(const Eigen::Vector4d& q) {
  if (std::abs(q.w()) < kMinHomogeneousW)
    throw DegenerateGeometry("triangulated point lies at infinity");
  return q.head<3>() / q.w();
}

}  // namespace detail

Point3 triangulate_dlt(const CameraRig& rig, std::span<const Observation> obs,
                       std::span<const double> weights) {
  if (!weights.empty() && weights.size() != obs.size())
    throw ConfigInvalid("triangulate_dlt: weights do not pair with observations");

  std::set<int> effective_views;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const int v = obs[i].view;
    if (v < 0 || static_cast<std::size_t>(v) >= rig.size())
      throw ConfigInvalid("triangulate_dlt: observation view index out of range");
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w < 0) throw ConfigInvalid("triangulate_dlt: negative weight");
    if (w > kMinEffectiveWeight) effective_views.insert(v);
  }
  if (effective_views.size() < 2)
    throw InsufficientViews("triangulate_dlt: need observations from at least "
                            "two distinct views with nonzero weight");

  Eigen::MatrixXd A(2 * obs.size(), 4);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const detail::ConditionedView cv = detail::condition_view(rig.cameras[obs[i].view]);
    detail::dlt_rows(cv, obs[i].pixel, w, A.middleRows<2>(2 * i));
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  return detail::dehomogenize(svd.matrixV().col(3));
}

Point3 triangulate_pair(const Camera& cam_a, const Camera& cam_b,
                        const Point2& pixel_a, const Point2& pixel_b) {
  if ((cam_a.center() - cam_b.center()).norm() <= kMinBaseline)
    throw DegenerateGeometry("camera pair has no baseline");
  CameraRig rig{{cam_a, cam_b}};
  const Observation obs[2] = {{0, pixel_a}, {1, pixel_b}};
  return triangulate_dlt(rig, obs);
}

Point2 normalize_to_bbox(const Point2& pixel, const BBox2& box) {
  box.validate();
  const Point2 c = box.center();
  return Point2(2.0 * (pixel.x() - c.x()) / box.width(),
                2.0 * (pixel.y() - c.y()) / box.height());
}

std::vector<Point2> normalize_to_bbox(std::span<const Point2> pixels, const BBox2& box) {
  std::vector<Point2> out;
  out.reserve(pixels.size());
  for (const Point2& p : pixels) out.push_back(normalize_to_bbox(p, box));
  return out;
}

Point2 denormalize_from_bbox(const Point2& normalized, const BBox2& box) {
  box.validate();
  const Point2 c = box.center();
  return Point2(c.x() + 0.5 * box.width() * normalized.x(),
                c.y() + 0.5 * box.height() * normalized.y());
}

std::vector<Point2> denormalize_from_bbox(std::span<const Point2> normalized,
                                          const BBox2& box) {
  std::vector<Point2> out;
  out.reserve(normalized.size());
  for (const Point2& p : normalized) out.push_back(denormalize_from_bbox(p, box));
  return out;
}

}  // namespace rtv
