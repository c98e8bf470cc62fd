#pragma once

#include <vector>

#include "rtv/types.hpp"

namespace rtv {

/// 2.5D pose: 2D detections plus depths split into an absolute root
/// depth and per-joint offsets from it (rel_depth_m[root] == 0).
struct Pose25D {
  std::vector<Point2> pixels;
  std::vector<double> rel_depth_m;
  double root_depth_m = 0.0;
};

/// Decomposes a world pose into the 2.5D representation of one camera.
/// Throws DegeneratePose on an empty pose or bad root index, and
/// NonPositiveDepth when any joint is not in front of the camera.
Pose25D project_to_25d(const Camera& cam, const Pose3D& pose_world, int root_index = 0);

/// Inverse of project_to_25d: scales each back-projected ray by the
/// reconstructed depth d_root + d_rel. Returns the pose in the
/// requested frame. Throws NonPositiveDepth when a reconstructed depth
/// is not positive, DegeneratePose on shape violations.
Pose3D lift_pose(const Camera& cam, const Pose25D& pose, Frame frame = Frame::world);

}  // namespace rtv
