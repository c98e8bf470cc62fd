#include "rtv/metrics.hpp"

#include <Eigen/Geometry>
#include <cmath>

#include "rtv/errors.hpp"

namespace rtv {

namespace {

constexpr double kMetersToMm = 1000.0;

void check_pair(const Pose3D& predicted, const Pose3D& actual,
                std::optional<int> root) {
  if (predicted.joints.empty() || actual.joints.empty())
    throw DegeneratePose("metrics: empty pose");
  if (predicted.joints.size() != actual.joints.size())
    throw JointCountMismatch("metrics: poses have " +
                             std::to_string(predicted.joints.size()) + " and " +
                             std::to_string(actual.joints.size()) + " joints");
  if (root && (*root < 0 ||
               static_cast<std::size_t>(*root) >= predicted.joints.size()))
    throw DegeneratePose("metrics: root index out of range");
}

/// Root-centered copies (identity when root is nullopt).
std::pair<std::vector<Point3>, std::vector<Point3>> centered(
    const Pose3D& predicted, const Pose3D& actual, std::optional<int> root) {
  std::vector<Point3> p = predicted.joints;
  std::vector<Point3> a = actual.joints;
  if (root) {
    const Point3 pr = p[*root];
    const Point3 ar = a[*root];
    for (Point3& x : p) x -= pr;
    for (Point3& x : a) x -= ar;
  }
  return {std::move(p), std::move(a)};
}

double mean_distance_mm(const std::vector<Point3>& p, const std::vector<Point3>& a) {
  double total = 0;
  for (std::size_t j = 0; j < p.size(); ++j) total += (p[j] - a[j]).norm();
  return kMetersToMm * total / static_cast<double>(p.size());
}

}  // namespace

double mpjpe(const Pose3D& predicted, const Pose3D& actual, std::optional<int> root) {
  check_pair(predicted, actual, root);
  auto [p, a] = centered(predicted, actual, root);
  return mean_distance_mm(p, a);
}

double nmpjpe(const Pose3D& predicted, const Pose3D& actual, std::optional<int> root) {
  check_pair(predicted, actual, root);
  auto [p, a] = centered(predicted, actual, root);
  double dot_pa = 0, dot_pp = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    dot_pa += p[j].dot(a[j]);
    dot_pp += p[j].dot(p[j]);
  }
  if (dot_pp <= 0) throw DegeneratePose("nmpjpe: prediction collapses to a point");
  const double scale = dot_pa / dot_pp;
  for (Point3& x : p) x *= scale;
  return mean_distance_mm(p, a);
}

double pmpjpe(const Pose3D& predicted, const Pose3D& actual) {
  check_pair(predicted, actual, std::nullopt);
  const std::size_t n = predicted.joints.size();
  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (std::size_t j = 0; j < n; ++j) {
    src.col(j) = predicted.joints[j];
    dst.col(j) = actual.joints[j];
  }
  const Eigen::Matrix4d sim = Eigen::umeyama(src, dst, true);
  double total = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const Point3 aligned = sim.topLeftCorner<3, 3>() * src.col(j) + sim.topRightCorner<3, 1>();
    total += (aligned - dst.col(j)).norm();
  }
  return kMetersToMm * total / static_cast<double>(n);
}

MetricReport metric_report(const Pose3D& predicted, const Pose3D& actual,
                           std::optional<int> root) {
  MetricReport report;
  report.mpjpe_mm = mpjpe(predicted, actual, root);
  report.nmpjpe_mm = nmpjpe(predicted, actual, root);
  report.pmpjpe_mm = pmpjpe(predicted, actual);
  auto [p, a] = centered(predicted, actual, root);
  report.per_joint_mm.reserve(p.size());
  for (std::size_t j = 0; j < p.size(); ++j)
    report.per_joint_mm.push_back(kMetersToMm * (p[j] - a[j]).norm());
  return report;
}

}  // namespace rtv
