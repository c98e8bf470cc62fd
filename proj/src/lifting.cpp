#include "rtv/lifting.hpp"

#include <Eigen/LU>

#include <string>

#include "rtv/errors.hpp"
#include "rtv/geometry.hpp"

namespace rtv {

Pose25D project_to_25d(const Camera& cam, const Pose3D& pose_world, int root_index) {
  if (pose_world.joints.empty()) throw DegeneratePose("project_to_25d: empty pose");
  if (pose_world.frame != Frame::world)
    throw DegeneratePose("project_to_25d: pose must be in world coordinates");
  if (root_index < 0 || static_cast<std::size_t>(root_index) >= pose_world.joints.size())
    throw DegeneratePose("project_to_25d: root index out of range");

  Pose25D out;
  out.root_depth_m = cam.depth(pose_world.joints[root_index]);
  if (out.root_depth_m <= 0)
    throw NonPositiveDepth("project_to_25d: root joint behind the camera");
  out.pixels.reserve(pose_world.joints.size());
  out.rel_depth_m.reserve(pose_world.joints.size());
  for (const Point3& joint : pose_world.joints) {
    out.pixels.push_back(project(cam, joint));
    out.rel_depth_m.push_back(cam.depth(joint) - out.root_depth_m);
  }
  return out;
}

Pose3D lift_pose(const Camera& cam, const Pose25D& pose, Frame frame) {
  if (pose.pixels.empty()) throw DegeneratePose("lift_pose: empty pose");
  if (pose.pixels.size() != pose.rel_depth_m.size())
    throw DegeneratePose("lift_pose: pixels and rel_depth_m lengths differ");

  const Mat3 k_inv = cam.K.inverse();
  Pose3D out;
  out.frame = frame;
  out.joints.reserve(pose.pixels.size());
  for (std::size_t j = 0; j < pose.pixels.size(); ++j) {
    const double depth = pose.root_depth_m + pose.rel_depth_m[j];
    if (depth <= 0)
      throw NonPositiveDepth("lift_pose: joint " + std::to_string(j) +
                             " has non-positive depth " + std::to_string(depth));
    const Point3 ray = k_inv * Point3(pose.pixels[j].x(), pose.pixels[j].y(), 1.0);
    const Point3 x_cam = depth * ray;
    out.joints.push_back(frame == Frame::camera ? x_cam
                                                : Point3(cam.R.transpose() * (x_cam - cam.t)));
  }
  return out;
}

}  // namespace rtv
