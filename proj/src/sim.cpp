#include "rtv/sim.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "rtv/errors.hpp"
#include "rtv/geometry.hpp"
#include "rtv/losses.hpp"
#include "rtv/threading.hpp"

namespace rtv {

namespace {

constexpr std::uint64_t kRobustnessTag = 0x726f6275u;  // sweep stream family
constexpr std::uint64_t kStabilityTag = 0x73746162u;   // descent stream family

std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

Camera ring_camera(const SceneConfig& cfg, int index) {
  const double angle = 2.0 * std::numbers::pi * index / cfg.n_cameras;
  const Point3 center(cfg.ring_radius_m * std::cos(angle),
                      cfg.ring_radius_m * std::sin(angle), cfg.camera_height_m);
  const Point3 forward = (cfg.look_at - center).normalized();
  const Point3 up(0, 0, 1);
  Point3 right = forward.cross(up);
  if (right.norm() < 1e-9)
    throw ConfigInvalid("scene: camera looks straight along the up axis");
  right.normalize();
  const Point3 down = forward.cross(right);

  Camera cam;
  cam.K << cfg.focal_px, 0, 0.5 * cfg.image_width,
           0, cfg.focal_px, 0.5 * cfg.image_height,
           0, 0, 1;
  cam.R.row(0) = right;
  cam.R.row(1) = down;
  cam.R.row(2) = forward;
  cam.t = -cam.R * center;
  cam.width = cfg.image_width;
  cam.height = cfg.image_height;
  return cam;
}

}  // namespace

void SceneConfig::validate() const {
  if (n_cameras < 2) throw ConfigInvalid("scene: n_cameras must be >= 2");
  if (!(ring_radius_m > 0)) throw ConfigInvalid("scene: ring_radius_m must be positive");
  if (!(focal_px > 0)) throw ConfigInvalid("scene: focal_px must be positive");
  if (image_width <= 0 || image_height <= 0)
    throw ConfigInvalid("scene: image size must be positive");
  if (n_points <= 0) throw ConfigInvalid("scene: n_points must be positive");
  for (int a = 0; a < 3; ++a)
    if (!(volume_min[a] < volume_max[a]))
      throw ConfigInvalid("scene: sample volume must have positive extent");
}

Scene generate_scene(const SceneConfig& config, RngStream& rng) {
  config.validate();

  Scene scene;
  scene.rig.cameras.reserve(config.n_cameras);
  for (int i = 0; i < config.n_cameras; ++i)
    scene.rig.cameras.push_back(ring_camera(config, i));
  scene.rig.validate();

  // Every corner of the sample volume must project inside every image,
  // so synthetic detections stay meaningful at all noise levels.
  for (const Camera& cam : scene.rig.cameras) {
    for (int corner = 0; corner < 8; ++corner) {
      const Point3 c(corner & 1 ? config.volume_max.x() : config.volume_min.x(),
                     corner & 2 ? config.volume_max.y() : config.volume_min.y(),
                     corner & 4 ? config.volume_max.z() : config.volume_min.z());
      Point2 px;
      try {
        px = project(cam, c);
      } catch (const NonPositiveDepth&) {
        throw ConfigInvalid("scene: sample volume extends behind a camera");
      }
      if (px.x() < 0 || px.x() > cam.width || px.y() < 0 || px.y() > cam.height)
        throw ConfigInvalid("scene: sample volume projects outside an image");
    }
  }

  scene.points.reserve(config.n_points);
  for (int p = 0; p < config.n_points; ++p)
    scene.points.emplace_back(rng.uniform(config.volume_min.x(), config.volume_max.x()),
                              rng.uniform(config.volume_min.y(), config.volume_max.y()),
                              rng.uniform(config.volume_min.z(), config.volume_max.z()));

  scene.projections.resize(scene.rig.size());
  for (std::size_t v = 0; v < scene.rig.size(); ++v) {
    scene.projections[v].reserve(scene.points.size());
    for (const Point3& p : scene.points)
      scene.projections[v].push_back(project(scene.rig.cameras[v], p));
  }
  return scene;
}

std::vector<std::vector<Point2>> apply_noise(
    const std::vector<std::vector<Point2>>& projections,
    const std::vector<int>& views, const NoiseSpec& spec, RngStream& rng) {
  std::vector<int> ordered = views;
  std::sort(ordered.begin(), ordered.end());
  std::vector<std::vector<Point2>> out = projections;
  for (const int v : ordered) {
    if (v < 0 || static_cast<std::size_t>(v) >= projections.size())
      throw ConfigInvalid("apply_noise: view index out of range");
    for (Point2& p : out[v]) {
      if (spec.kind == NoiseKind::circle) {
        p += rng.on_circle(spec.magnitude_px);
      } else {
        p.x() += spec.magnitude_px * rng.gaussian();
        p.y() += spec.magnitude_px * rng.gaussian();
      }
    }
  }
  return out;
}

std::string_view to_string(TriMethod method) {
  switch (method) {
    case TriMethod::standard: return "standard";
    case TriMethod::weights_no_wss: return "weights_no_wss";
    case TriMethod::weights_wss: return "weights_wss";
  }
  throw ConfigInvalid("to_string: unknown method");
}

TriMethod tri_method_from_string(std::string_view name) {
  if (name == "standard") return TriMethod::standard;
  if (name == "weights_no_wss") return TriMethod::weights_no_wss;
  if (name == "weights_wss") return TriMethod::weights_wss;
  throw ParseError("unknown method '" + std::string(name) +
                   "', expected standard, weights_no_wss, or weights_wss");
}

void RobustnessConfig::validate() const {
  scene.validate();
  robust.validate();
  if (trials <= 0) throw ConfigInvalid("sweep: trials must be positive");
  if (noise_levels_px.empty() || noisy_view_counts.empty() || methods.empty())
    throw ConfigInvalid("sweep: noise levels, view counts, and methods must be non-empty");
  for (const double level : noise_levels_px)
    if (level < 0) throw ConfigInvalid("sweep: noise level must be >= 0");
  for (const int count : noisy_view_counts)
    if (count < 0 || count > scene.n_cameras)
      throw ConfigInvalid("sweep: noisy view count must be in [0, n_cameras]");
}

std::vector<RobustnessRow> run_robustness_sweep(const RobustnessConfig& config) {
  config.validate();

  const std::size_t n_levels = config.noise_levels_px.size();
  const std::size_t n_counts = config.noisy_view_counts.size();
  const std::size_t n_methods = config.methods.size();
  const std::size_t n_trials = static_cast<std::size_t>(config.trials);
  const std::size_t n_tasks = n_levels * n_counts * n_trials;

  std::vector<RobustnessRow> rows(n_tasks * n_methods);

  parallel_for(n_tasks, [&](std::size_t task) {
    const std::size_t trial = task % n_trials;
    const std::size_t count_i = (task / n_trials) % n_counts;
    const std::size_t level_i = task / (n_trials * n_counts);
    const double level = config.noise_levels_px[level_i];
    const int count = config.noisy_view_counts[count_i];

    const std::uint64_t task_seed = derive_seed(
        config.seed, {kRobustnessTag, bits(level), static_cast<std::uint64_t>(count),
                      static_cast<std::uint64_t>(trial)});
    RngStream rng(task_seed);
    const Scene scene = generate_scene(config.scene, rng);
    const std::vector<int> corrupted =
        rng.sample_indices(config.scene.n_cameras, count);
    const std::vector<std::vector<Point2>> noisy = apply_noise(
        scene.projections, corrupted, {NoiseKind::circle, level}, rng);

    for (std::size_t method_i = 0; method_i < n_methods; ++method_i) {
      const TriMethod method = config.methods[method_i];
      double err = 0;
      int counted = 0;
      int skipped = 0;
      for (std::size_t p = 0; p < scene.points.size(); ++p) {
        try {
          Point3 x;
          if (method == TriMethod::standard) {
            std::vector<Observation> obs;
            obs.reserve(scene.rig.size());
            for (std::size_t v = 0; v < scene.rig.size(); ++v)
              obs.push_back({static_cast<int>(v), noisy[v][p]});
            x = triangulate_dlt(scene.rig, obs);
          } else {
            PerViewPoints det(scene.rig.size());
            for (std::size_t v = 0; v < scene.rig.size(); ++v) det[v] = noisy[v][p];
            x = robust_triangulate(scene.rig, det, config.robust,
                                   method == TriMethod::weights_wss)
                    .point;
          }
          err += (x - scene.points[p]).norm();
          ++counted;
        } catch (const Error&) {
          ++skipped;
        }
      }

      RobustnessRow row;
      row.seed = task_seed;
      row.method = method;
      row.noise_px = level;
      row.n_noisy_views = count;
      row.mpjpe_mm = counted ? 1000.0 * err / counted : 0.0;
      row.skipped_points = skipped;
      rows[((level_i * n_counts + count_i) * n_methods + method_i) * n_trials + trial] =
          row;
    }
  }, config.threads);

  return rows;
}

void StabilityConfig::validate() const {
  scene.validate();
  if (scene.n_cameras != 3)
    throw ConfigInvalid("stability: the study runs on exactly 3 cameras");
  if (trials <= 0) throw ConfigInvalid("stability: trials must be positive");
  if (alphas.empty()) throw ConfigInvalid("stability: alphas must be non-empty");
  for (const double a : alphas)
    if (!(a >= 0 && a <= 1)) throw ConfigInvalid("stability: alpha must be in [0,1]");
  if (n_steps <= 0) throw ConfigInvalid("stability: n_steps must be positive");
  if (!(step_size > 0)) throw ConfigInvalid("stability: step_size must be positive");
  if (base_noise_px < 0 || heavy_noise_px < 0)
    throw ConfigInvalid("stability: noise levels must be >= 0");
}

std::vector<StabilityRow> run_stability_study(const StabilityConfig& config) {
  config.validate();

  const std::size_t n_alphas = config.alphas.size();
  const std::size_t n_trials = static_cast<std::size_t>(config.trials);
  const std::size_t n_steps = static_cast<std::size_t>(config.n_steps);
  std::vector<StabilityRow> rows(n_alphas * n_trials * n_steps);

  parallel_for(n_alphas * n_trials, [&](std::size_t task) {
    const std::size_t trial = task % n_trials;
    const std::size_t alpha_i = task / n_trials;
    const double alpha = config.alphas[alpha_i];

    // The stream ignores alpha, so every alpha descends from the same
    // noisy detections of its trial.
    const std::uint64_t trial_seed = derive_seed(
        config.seed, {kStabilityTag, static_cast<std::uint64_t>(trial)});
    RngStream rng(trial_seed);
    const Scene scene = generate_scene(config.scene, rng);

    const int heavy_view = rng.uniform_int(config.scene.n_cameras);
    std::vector<int> all_views(scene.rig.size());
    for (std::size_t v = 0; v < all_views.size(); ++v) all_views[v] = static_cast<int>(v);
    std::vector<std::vector<Point2>> noisy = apply_noise(
        scene.projections, all_views, {NoiseKind::gaussian, config.base_noise_px}, rng);
    noisy = apply_noise(noisy, {heavy_view},
                        {NoiseKind::gaussian, config.heavy_noise_px}, rng);

    MultiViewDetections det;
    det.points.resize(scene.rig.size());
    det.valid.resize(scene.rig.size());
    det.view_bbox.resize(scene.rig.size());
    for (std::size_t v = 0; v < scene.rig.size(); ++v) {
      det.view_bbox[v] = BBox2::image_rect(scene.rig.cameras[v]);
      det.valid[v].assign(scene.points.size(), 1);
      det.points[v].reserve(scene.points.size());
      for (const Point2& px : noisy[v])
        det.points[v].push_back(normalize_to_bbox(px, det.view_bbox[v]));
    }

    DescentConfig descent;
    descent.alpha = alpha;
    descent.step_size = config.step_size;
    descent.n_steps = config.n_steps;
    const std::vector<DescentSample> traj =
        descend_detections(scene.rig, det, scene.points, descent);

    for (std::size_t s = 0; s < n_steps; ++s) {
      StabilityRow row;
      row.seed = trial_seed;
      row.alpha = alpha;
      row.step = static_cast<int>(s);
      row.loss = traj[s].loss;
      row.mpjpe_mm = traj[s].mpjpe_mm;
      row.center_drift_px = traj[s].center_drift_px;
      rows[(alpha_i * n_trials + trial) * n_steps + s] = row;
    }
  }, config.threads);

  return rows;
}

}  // namespace rtv
