#pragma once

#include <span>
#include <vector>

#include "rtv/errors.hpp"
#include "rtv/types.hpp"

namespace rtv {

/// Projects a world point into a camera. Throws NonPositiveDepth if the
/// point is not strictly in front of the camera (depth <= 1e-12 m).
Point2 project(const Camera& cam, const Point3& x_world);

/// Linear least-squares triangulation of one point from two or more
/// views. Each observation contributes two equations, scaled by the
/// matching weight (all ones when weights is empty). Image coordinates
/// are conditioned per view before stacking so the system is well
/// scaled regardless of image size.
///
/// Throws InsufficientViews when fewer than two distinct views carry a
/// weight > 1e-12, and DegenerateGeometry when the solution lies at
/// infinity (|homogeneous w| < 1e-12).
Point3 triangulate_dlt(const CameraRig& rig, std::span<const Observation> obs,
                       std::span<const double> weights = {});

/// Two-view convenience wrapper. Additionally throws DegenerateGeometry
/// when the camera centers are closer than 1e-6 m.
Point3 triangulate_pair(const Camera& cam_a, const Camera& cam_b,
                        const Point2& pixel_a, const Point2& pixel_b);

/// Maps pixel coordinates into [-1,1]^2 over the box (affine, exact
/// corners to corners). Throws EmptyBBox for a degenerate box.
Point2 normalize_to_bbox(const Point2& pixel, const BBox2& box);
std::vector<Point2> normalize_to_bbox(std::span<const Point2> pixels, const BBox2& box);

/// Inverse of normalize_to_bbox.
Point2 denormalize_from_bbox(const Point2& normalized, const BBox2& box);
std::vector<Point2> denormalize_from_bbox(std::span<const Point2> normalized, const BBox2& box);

namespace detail {

/// Per-view image conditioning: pixel -> scale * (pixel - offset),
/// chosen from the image rectangle so conditioned coordinates have
/// zero mean and RMS sqrt(2) over the frame corners. Constant with
/// respect to the detections, so it contributes only a fixed factor
/// to derivatives.
struct ConditionedView {
  Mat34 P = Mat34::Zero();  // conditioned projection, T * K * [R|t]
  double scale = 1.0;
  Point2 offset = Point2::Zero();

  Point2 apply(const Point2& pixel) const { return scale * (pixel - offset); }
};

ConditionedView condition_view(const Camera& cam);

/// Writes the two DLT rows for one conditioned observation:
///   w * (u' * P.row(2) - P.row(0))
///   w * (v' * P.row(2) - P.row(1))
void dlt_rows(const ConditionedView& view, const Point2& pixel, double weight,
              Eigen::Ref<Eigen::Matrix<double, 2, 4>> rows);

/// Dehomogenizes the null-space vector of a stacked DLT system.
/// Throws DegenerateGeometry if |q.w| < 1e-12.
Point3 dehomogenize(const Eigen::Vector4d& q);

}  // namespace detail

}  // namespace rtv
