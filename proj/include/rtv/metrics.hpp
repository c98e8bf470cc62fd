#pragma once

#include <optional>
#include <vector>

#include "rtv/types.hpp"

namespace rtv {

/// Joint-position error metrics. Poses are in meters; results are in
/// millimeters. `root` selects the alignment joint; nullopt compares
/// absolute positions (useful for free point sets with no skeleton).

/// Mean per-joint distance after translating the prediction so its
/// root coincides with the ground-truth root.
double mpjpe(const Pose3D& predicted, const Pose3D& actual,
             std::optional<int> root = 0);

/// mpjpe after additionally applying the closed-form optimal uniform
/// scale s* = <pred, gt> / <pred, pred> to the (root-centered) prediction.
double nmpjpe(const Pose3D& predicted, const Pose3D& actual,
              std::optional<int> root = 0);

/// mpjpe after a full similarity (Procrustes) alignment: the
/// least-squares optimal scale, rotation, and translation.
double pmpjpe(const Pose3D& predicted, const Pose3D& actual);

struct MetricReport {
  double mpjpe_mm = 0;
  double nmpjpe_mm = 0;
  double pmpjpe_mm = 0;
  std::vector<double> per_joint_mm;  // root-aligned distances
};

MetricReport metric_report(const Pose3D& predicted, const Pose3D& actual,
                           std::optional<int> root = 0);

}  // namespace rtv
