#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

namespace rtv {

using Point2 = Eigen::Vector2d;
using Point3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

/// Pinhole camera. World units are meters, image units are pixels.
/// R maps world to camera coordinates; t = -R * center.
struct Camera {
  Mat3 K = Mat3::Identity();
  Mat3 R = Mat3::Identity();
  Point3 t = Point3::Zero();
  int width = 0;
  int height = 0;

  /// K * [R | t]
  Mat34 projection_matrix() const;

  /// Camera center in world coordinates: -R^T * t.
  Point3 center() const;

  /// Depth of a world point along the optical axis.
  double depth(const Point3& x_world) const;

  /// Throws ConfigInvalid if K is not upper-triangular with positive
  /// focal lengths, R is not a rotation (within 1e-9), or the image
  /// size is not positive.
  void validate() const;
};

/// A calibrated multi-camera setup.
struct CameraRig {
  std::vector<Camera> cameras;

  std::size_t size() const { return cameras.size(); }

  /// Throws ConfigInvalid unless there are >= 2 cameras, each valid,
  /// with pairwise baselines > 1e-6 m.
  void validate() const;
};

/// Axis-aligned rectangle in pixel coordinates.
struct BBox2 {
  Point2 min = Point2::Zero();
  Point2 max = Point2::Zero();

  double width() const { return max.x() - min.x(); }
  double height() const { return max.y() - min.y(); }
  Point2 center() const { return 0.5 * (min + max); }

  /// Throws EmptyBBox if width or height is not strictly positive.
  void validate() const;

  static BBox2 image_rect(const Camera& cam);
};

enum class Frame : std::uint8_t { world, camera };

/// An ordered set of 3D joints, either in world or camera coordinates.
struct Pose3D {
  std::vector<Point3> joints;
  Frame frame = Frame::world;
};

/// Detections of one joint across a rig; index parallels rig.cameras.
/// nullopt marks views where the joint was not observed.
using PerViewPoints = std::vector<std::optional<Point2>>;

/// One observation feeding DLT: which view saw the point, and where.
struct Observation {
  int view = -1;
  Point2 pixel = Point2::Zero();
};

/// Per-view 2D detections for a set of joints, normalized per view to
/// [-1,1]^2 over its bounding box. points[v][j] pairs with valid[v][j].
struct MultiViewDetections {
  std::vector<std::vector<Point2>> points;
  std::vector<std::vector<std::uint8_t>> valid;
  std::vector<BBox2> view_bbox;

  std::size_t view_count() const { return points.size(); }
  std::size_t joint_count() const { return points.empty() ? 0 : points[0].size(); }

  /// Throws ConfigInvalid on ragged shapes or view/bbox mismatch.
  void validate() const;
};

}  // namespace rtv
