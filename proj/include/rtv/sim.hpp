#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "rtv/rng.hpp"
#include "rtv/robust.hpp"
#include "rtv/types.hpp"

namespace rtv {

/// Synthetic capture setup: cameras on a horizontal ring, all aimed at
/// a common target, observing points drawn uniformly from a box.
struct SceneConfig {
  int n_cameras = 6;
  double ring_radius_m = 5.0;
  double camera_height_m = 1.6;
  Point3 look_at = Point3(0, 0, 1);
  double focal_px = 1000.0;
  int image_width = 1920;
  int image_height = 1080;
  int n_points = 100;
  Point3 volume_min = Point3(-1, -1, 0);
  Point3 volume_max = Point3(1, 1, 2);

  void validate() const;
};

struct Scene {
  CameraRig rig;
  std::vector<Point3> points;
  std::vector<std::vector<Point2>> projections;  // [view][point], exact
};

/// Deterministic scene construction. Cameras depend only on the config;
/// points are drawn from the stream. Throws ConfigInvalid if any sample
/// volume corner is not strictly in front of every camera.
Scene generate_scene(const SceneConfig& config, RngStream& rng);

enum class NoiseKind : std::uint8_t { circle, gaussian };

/// circle: displacement of exactly magnitude_px in a uniform direction.
/// gaussian: independent N(0, magnitude_px^2) on each axis.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::circle;
  double magnitude_px = 0.0;
};

/// Adds noise to the listed views (in ascending view order, points in
/// order, so equal streams give equal results).
std::vector<std::vector<Point2>> apply_noise(
    const std::vector<std::vector<Point2>>& projections,
    const std::vector<int>& views, const NoiseSpec& spec, RngStream& rng);

enum class TriMethod : std::uint8_t { standard, weights_no_wss, weights_wss };

std::string_view to_string(TriMethod method);
TriMethod tri_method_from_string(std::string_view name);  // throws ParseError

/// Robustness sweep: for every (noise level, corrupted view count,
/// trial), fresh points and one shared noise draw are triangulated by
/// each method, so methods are compared on identical inputs.
struct RobustnessConfig {
  SceneConfig scene;
  std::vector<double> noise_levels_px = {0, 2, 5, 10, 15, 20};
  std::vector<int> noisy_view_counts = {0, 1, 2, 3, 4, 5};
  std::vector<TriMethod> methods = {TriMethod::standard, TriMethod::weights_no_wss,
                                    TriMethod::weights_wss};
  int trials = 50;
  RobustConfig robust;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: thread_budget()

  void validate() const;
};

struct RobustnessRow {
  std::uint64_t seed = 0;  // per-trial derived seed, shared by methods
  TriMethod method = TriMethod::standard;
  double noise_px = 0;
  int n_noisy_views = 0;
  double mpjpe_mm = 0;
  int skipped_points = 0;
};

/// Rows ordered by (noise level, view count, method, trial) following
/// the config lists; identical for every thread count.
std::vector<RobustnessRow> run_robustness_sweep(const RobustnessConfig& config);

/// Descent stability study on a 3-camera scene: detections carry 1 px
/// Gaussian noise everywhere plus 10 px on one random view, then
/// descend the loss for each alpha from the same starting detections.
struct StabilityConfig {
  SceneConfig scene;
  std::vector<double> alphas = {0.0, 0.1, 0.5, 1.0};
  int n_steps = 500;
  double step_size = 0.05;
  int trials = 20;
  double base_noise_px = 1.0;
  double heavy_noise_px = 10.0;
  std::uint64_t seed = 0;
  int threads = 0;

  StabilityConfig() { scene.n_cameras = 3; }
  void validate() const;
};

struct StabilityRow {
  std::uint64_t seed = 0;  // per-trial derived seed, shared by alphas
  double alpha = 0;
  int step = 0;
  double loss = 0;
  double mpjpe_mm = 0;
  double center_drift_px = 0;
};

/// Rows ordered by (alpha, trial, step); identical for every thread count.
std::vector<StabilityRow> run_stability_study(const StabilityConfig& config);

}  // namespace rtv
