#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "rtv/geometry.hpp"
#include "rtv/types.hpp"

namespace rtv {

/// All pairwise two-view triangulations of one joint, plus their
/// geometric-median center. Keys are view pairs with first < second.
struct DetectionCluster {
  std::map<std::pair<int, int>, Point3> candidates;
  Point3 center = Point3::Zero();
  std::vector<int> contributing_views;
  std::vector<std::pair<int, int>> degenerate_pairs;
};

/// Convergence details of a geometric_median run.
struct GeoMedInfo {
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;
};

/// How the candidate-spread statistic is compared against the
/// rejection threshold: as an RMS distance in mm, or as the raw mean
/// of squared distances in mm^2.
enum class WssCompare { rms, squared };

/// What the robust pipeline returns as the final point: a weighted
/// linear triangulation, or the cluster center itself.
enum class RobustTarget { wdlt, geomed };

struct RobustConfig {
  double sigma_mm = 10.0;            // agreement bandwidth
  double wss_threshold_mm = 20.0;    // rejection threshold
  double fallback_weight = 1e-3;     // uniform weight after rejection
  WssCompare wss_compare = WssCompare::rms;
  RobustTarget target = RobustTarget::wdlt;

  void validate() const;
};

struct RobustTriangulation {
  Point3 point = Point3::Zero();
  std::map<int, double> view_weights;
  std::map<std::pair<int, int>, double> pair_weights;
  double wss_mm = 0.0;  // comparison quantity, units set by wss_compare
  bool rejected = false;
  DetectionCluster cluster;
};

/// Triangulates every unordered pair of valid views. Degenerate pairs
/// are recorded and skipped; throws DegenerateGeometry only when no
/// pair survives, InsufficientViews when fewer than two views are valid.
DetectionCluster build_cluster(const CameraRig& rig, const PerViewPoints& detections);

/// Weiszfeld iteration with coordinate-wise-median start, 1e-9 m step
/// tolerance, 200 iteration cap, and the Vardi-Zhang rule when an
/// iterate lands on an input point. Input points are tested for exact
/// optimality first, so a median that coincides with a data point is
/// returned exactly. Throws ConfigInvalid on empty input.
Point3 geometric_median(std::span<const Point3> points, GeoMedInfo* info = nullptr);

/// exp(-d^2 / sigma^2) with d the center-to-candidate distance in mm.
std::map<std::pair<int, int>, double> pairwise_weights(const DetectionCluster& cluster,
                                                       double sigma_mm);

/// Per-view weight: median of the pair weights the view appears in
/// (mean of the two central values for even counts).
std::map<int, double> per_view_weights(
    const std::map<std::pair<int, int>, double>& pair_weights);

/// Mean squared candidate-to-center distance, mm^2. Zero iff every
/// candidate coincides with the center.
double wss(const DetectionCluster& cluster);

/// Converts the wss statistic to the configured comparison quantity.
double wss_comparison_value(double wss_mm2, WssCompare mode);

/// Full pipeline: cluster, center, weights, spread statistic, and the
/// final point. When the spread exceeds the threshold (and the gate is
/// enabled) the joint is rejected and re-triangulated with a uniform
/// fallback weight on every valid view, which matches unweighted DLT.
RobustTriangulation robust_triangulate(const CameraRig& rig,
                                       const PerViewPoints& detections,
                                       const RobustConfig& config = {},
                                       bool apply_wss_gate = true);

}  // namespace rtv
