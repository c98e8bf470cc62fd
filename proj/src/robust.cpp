#include "rtv/robust.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <set>

#include "rtv/errors.hpp"

namespace rtv {

namespace {

constexpr double kStepTolM = 1e-9;
constexpr int kMaxIterations = 200;
constexpr double kAnchorTolM = 1e-12;
constexpr double kMetersToMm = 1000.0;

double sum_of_distances(const Point3& y, std::span<const Point3> points) {
  double s = 0;
  for (const Point3& p : points) s += (y - p).norm();
  return s;
}

Point3 coordinate_median(std::span<const Point3> points) {
  Point3 m;
  std::vector<double> axis(points.size());
  for (int a = 0; a < 3; ++a) {
    for (std::size_t i = 0; i < points.size(); ++i) axis[i] = points[i][a];
    std::sort(axis.begin(), axis.end());
    const std::size_t n = axis.size();
    m[a] = (n % 2 == 1) ? axis[n / 2] : 0.5 * (axis[n / 2 - 1] + axis[n / 2]);
  }
  return m;
}

}  // namespace

void RobustConfig::validate() const {
  if (!(sigma_mm > 0)) throw ConfigInvalid("sigma_mm must be positive");
  if (!(wss_threshold_mm > 0)) throw ConfigInvalid("wss_threshold_mm must be positive");
  if (!(fallback_weight > 0)) throw ConfigInvalid("fallback_weight must be positive");
}

DetectionCluster build_cluster(const CameraRig& rig, const PerViewPoints& detections) {
  if (detections.size() != rig.size())
    throw ConfigInvalid("build_cluster: detections do not pair with rig cameras");

  std::vector<int> valid;
  for (std::size_t v = 0; v < detections.size(); ++v)
    if (detections[v]) valid.push_back(static_cast<int>(v));
  if (valid.size() < 2)
    throw InsufficientViews("build_cluster: need at least two valid detections");

  DetectionCluster cluster;
  std::set<int> contributing;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    for (std::size_t j = i + 1; j < valid.size(); ++j) {
      const int a = valid[i], b = valid[j];
      try {
        cluster.candidates[{a, b}] = triangulate_pair(
            rig.cameras[a], rig.cameras[b], *detections[a], *detections[b]);
        contributing.insert(a);
        contributing.insert(b);
      } catch (const DegenerateGeometry&) {
        cluster.degenerate_pairs.emplace_back(a, b);
      }
    }
  }
  if (cluster.candidates.empty())
    throw DegenerateGeometry("build_cluster: every view pair is degenerate");

  cluster.contributing_views.assign(contributing.begin(), contributing.end());
  std::vector<Point3> candidate_points;
  candidate_points.reserve(cluster.candidates.size());
  for (const auto& [pair, p] : cluster.candidates) candidate_points.push_back(p);
  cluster.center = geometric_median(candidate_points);
  return cluster;
}

Point3 geometric_median(std::span<const Point3> points, GeoMedInfo* info) {
  if (points.empty()) throw ConfigInvalid("geometric_median: no points");
  if (info) *info = GeoMedInfo{};

  // A data point is the minimizer iff the unit pull of the others is at
  // most its multiplicity. Catching that exactly up front matters: the
  // iteration only creeps toward such a point and never reaches it.
  for (const Point3& candidate : points) {
    Point3 pull = Point3::Zero();
    int multiplicity = 0;
    for (const Point3& p : points) {
      const double d = (candidate - p).norm();
      if (d < kAnchorTolM)
        ++multiplicity;
      else
        pull += (p - candidate) / d;
    }
    if (pull.norm() <= multiplicity) {
      if (info) {
        info->converged = true;
        info->objective_trace.push_back(sum_of_distances(candidate, points));
      }
      return candidate;
    }
  }

  Point3 y = coordinate_median(points);
  if (info) info->objective_trace.push_back(sum_of_distances(y, points));

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    // One Weiszfeld step: distance-weighted mean of the points away
    // from the iterate, with anchored points (distance ~ 0) split out.
    Point3 weighted_sum = Point3::Zero();
    double weight_total = 0;
    Point3 anchor_pull = Point3::Zero();  // sum of unit vectors toward non-anchors
    int anchor_multiplicity = 0;
    for (const Point3& p : points) {
      const double d = (y - p).norm();
      if (d < kAnchorTolM) {
        ++anchor_multiplicity;
        continue;
      }
      weighted_sum += p / d;
      weight_total += 1.0 / d;
      anchor_pull += (p - y) / d;
    }

    Point3 next;
    if (anchor_multiplicity > 0) {
      if (weight_total == 0) break;  // all points coincide with y
      const double pull = anchor_pull.norm();
      // The iterate sits on an input point of multiplicity m; it is the
      // minimizer when the pull of the remaining points is at most m.
      if (pull <= anchor_multiplicity) break;
      const Point3 plain = weighted_sum / weight_total;
      const double eta = anchor_multiplicity / pull;
      next = (1.0 - eta) * plain + eta * y;
    } else {
      next = weighted_sum / weight_total;
    }

    const double step = (next - y).norm();
    y = next;
    if (info) {
      ++info->iterations;
      const double obj = sum_of_distances(y, points);
      assert(info->objective_trace.empty() ||
             obj <= info->objective_trace.back() + 1e-12);
      info->objective_trace.push_back(obj);
    }
    if (step < kStepTolM) {
      if (info) info->converged = true;
      break;
    }
  }
  if (info && !info->converged && info->iterations < kMaxIterations)
    info->converged = true;  // exited through an optimality condition
  return y;
}

std::map<std::pair<int, int>, double> pairwise_weights(const DetectionCluster& cluster,
                                                       double sigma_mm) {
  if (!(sigma_mm > 0)) throw ConfigInvalid("pairwise_weights: sigma_mm must be positive");
  std::map<std::pair<int, int>, double> weights;
  for (const auto& [pair, candidate] : cluster.candidates) {
    const double d_mm = kMetersToMm * (cluster.center - candidate).norm();
    weights[pair] = std::exp(-(d_mm * d_mm) / (sigma_mm * sigma_mm));
  }
  return weights;
}

std::map<int, double> per_view_weights(
    const std::map<std::pair<int, int>, double>& pair_weights) {
  std::map<int, std::vector<double>> per_view;
  for (const auto& [pair, w] : pair_weights) {
    per_view[pair.first].push_back(w);
    per_view[pair.second].push_back(w);
  }
  std::map<int, double> medians;
  for (auto& [view, ws] : per_view) {
    std::sort(ws.begin(), ws.end());
    const std::size_t n = ws.size();
    medians[view] =
        (n % 2 == 1) ? ws[n / 2] : 0.5 * (ws[n / 2 - 1] + ws[n / 2]);
  }
  return medians;
}

double wss(const DetectionCluster& cluster) {
  if (cluster.candidates.empty())
    throw ConfigInvalid("wss: cluster has no candidates");
  double total = 0;
  for (const auto& [pair, candidate] : cluster.candidates) {
    const double d_mm = kMetersToMm * (cluster.center - candidate).norm();
    total += d_mm * d_mm;
  }
  return total / static_cast<double>(cluster.candidates.size());
}

double wss_comparison_value(double wss_mm2, WssCompare mode) {
  return mode == WssCompare::rms ? std::sqrt(wss_mm2) : wss_mm2;
}

RobustTriangulation robust_triangulate(const CameraRig& rig,
                                       const PerViewPoints& detections,
                                       const RobustConfig& config,
                                       bool apply_wss_gate) {
  config.validate();

  RobustTriangulation out;
  out.cluster = build_cluster(rig, detections);
  out.pair_weights = pairwise_weights(out.cluster, config.sigma_mm);
  out.view_weights = per_view_weights(out.pair_weights);
  out.wss_mm = wss_comparison_value(wss(out.cluster), config.wss_compare);
  out.rejected = apply_wss_gate && out.wss_mm > config.wss_threshold_mm;

  std::vector<Observation> obs;
  std::vector<double> weights;
  if (out.rejected) {
    // Uniform weights on every valid view; by scale invariance of the
    // homogeneous system this reproduces unweighted DLT.
    for (std::size_t v = 0; v < detections.size(); ++v) {
      if (!detections[v]) continue;
      obs.push_back({static_cast<int>(v), *detections[v]});
      weights.push_back(config.fallback_weight);
    }
  } else {
    for (const auto& [view, w] : out.view_weights) {
      obs.push_back({view, *detections[view]});
      weights.push_back(w);
    }
    // The homogeneous system is invariant to a common weight scale, so
    // renormalize to keep heavily-discounted joints solvable instead of
    // underflowing to an all-zero system. A relative floor keeps the
    // stacked system multi-view: beyond a 1e6:1 ratio a view's influence
    // is already negligible, but the solve must stay well-posed.
    constexpr double kSolverWeightFloor = 1e-6;
    const double top = *std::max_element(weights.begin(), weights.end());
    if (top > 0)
      for (double& w : weights) w = std::max(w / top, kSolverWeightFloor);
    else
      for (double& w : weights) w = 1.0;
  }

  if (!out.rejected && config.target == RobustTarget::geomed)
    out.point = out.cluster.center;
  else
    out.point = triangulate_dlt(rig, obs, weights);
  return out;
}

}  // namespace rtv
