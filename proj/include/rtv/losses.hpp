#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtv/types.hpp"

namespace rtv {

/// Per-view per-joint scalars, indexed [view][joint]. Empty means all
/// ones. Weights are treated as constants by the gradients.
using WeightGrid = std::vector<std::vector<double>>;

struct SkippedJoint {
  int joint = -1;
  std::string reason;
};

/// Value and two-path gradients of the triangulation consistency loss.
///
/// For each joint, the current detections are triangulated and
/// reprojected; the loss accumulates weighted squared residuals between
/// detections and reprojections in normalized coordinates. The gradient
/// with respect to each detection splits into
///   grad_direct:  residual term, reprojections held fixed,
///   grad_through: reprojection term, detections in the residual held
///                 fixed, differentiated through the triangulation.
/// Their alpha-blend recovers descent directions from a pure detection
/// update (alpha = 1) to a pure triangulation update (alpha = 0).
struct TriLossResult {
  double loss = 0.0;
  std::vector<std::vector<Point2>> grad_direct;   // [view][joint]
  std::vector<std::vector<Point2>> grad_through;  // [view][joint]
  std::vector<std::optional<Point3>> triangulated;  // per joint, world
  std::vector<SkippedJoint> skipped;

  /// alpha * grad_direct + (1 - alpha) * grad_through.
  std::vector<std::vector<Point2>> grad_total(double alpha) const;
};

/// Loss value only. Joints with fewer than two usable views, or whose
/// triangulation degenerates, contribute nothing.
double tri_loss(const CameraRig& rig, const MultiViewDetections& detections,
                const WeightGrid& weights = {});

/// Loss and gradients. A joint is skipped (recorded, zero gradient, no
/// loss contribution) when it has fewer than two usable views, its
/// triangulation degenerates, a reprojection falls behind a camera, or
/// the two smallest singular values of its system are separated by
/// less than 1e-9, which makes the derivative unreliable.
TriLossResult tri_loss_grad(const CameraRig& rig,
                            const MultiViewDetections& detections,
                            const WeightGrid& weights = {});

struct DescentSample {
  double loss = 0.0;
  double mpjpe_mm = 0.0;
  double center_drift_px = 0.0;
};

struct DescentConfig {
  double alpha = 0.5;
  double step_size = 0.05;  // in normalized detection units
  int n_steps = 500;

  void validate() const;
};

/// Plain gradient descent of the unweighted loss over the detections.
/// Sample k describes the state after k updates (sample 0 is the
/// input). mpjpe_mm compares the re-triangulated joints against
/// ground_truth without alignment; center_drift_px is the mean pixel
/// distance of the detections from their view centers. Joints that
/// fail to differentiate in a step keep their detections that step.
std::vector<DescentSample> descend_detections(const CameraRig& rig,
                                              MultiViewDetections detections,
                                              const std::vector<Point3>& ground_truth,
                                              const DescentConfig& config);

}  // namespace rtv
