#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "rtv/errors.hpp"
#include "rtv/results_csv.hpp"
#include "rtv/robust.hpp"
#include "rtv/scene_io.hpp"
#include "rtv/sim.hpp"

namespace {

using nlohmann::json;

rtv::WssCompare wss_compare_from_string(const std::string& s) {
  if (s == "rms") return rtv::WssCompare::rms;
  if (s == "squared") return rtv::WssCompare::squared;
  throw rtv::ParseError("wss-compare: expected 'rms' or 'squared', got '" + s + "'");
}

rtv::RobustTarget target_from_string(const std::string& s) {
  if (s == "wdlt") return rtv::RobustTarget::wdlt;
  if (s == "geomed") return rtv::RobustTarget::geomed;
  throw rtv::ParseError("target: expected 'wdlt' or 'geomed', got '" + s + "'");
}

/// Ahead-of-parse scan for --config so flags can override its values.
std::string find_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return {};
}

json load_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rtv::ParseError("cannot open config file '" + path + "'");
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::parse_error& e) {
    throw rtv::ParseError("config file '" + path + "': " + e.what());
  }
}

void apply_scene_key(rtv::SceneConfig& scene, const std::string& key, const json& v) {
  if (key == "cameras") scene.n_cameras = v.get<int>();
  else if (key == "points") scene.n_points = v.get<int>();
  else if (key == "ring-radius") scene.ring_radius_m = v.get<double>();
  else if (key == "camera-height") scene.camera_height_m = v.get<double>();
  else if (key == "focal") scene.focal_px = v.get<double>();
  else if (key == "image-width") scene.image_width = v.get<int>();
  else if (key == "image-height") scene.image_height = v.get<int>();
  else throw rtv::ParseError("config: unknown field '" + key + "'");
}

void apply_robust_key(rtv::RobustConfig& robust, const std::string& key, const json& v) {
  if (key == "sigma-mm") robust.sigma_mm = v.get<double>();
  else if (key == "wss-mm") robust.wss_threshold_mm = v.get<double>();
  else if (key == "fallback-weight") robust.fallback_weight = v.get<double>();
  else if (key == "wss-compare") robust.wss_compare = wss_compare_from_string(v.get<std::string>());
  else if (key == "target") robust.target = target_from_string(v.get<std::string>());
  else throw rtv::ParseError("config: unknown field '" + key + "'");
}

void load_robustness_config(const json& j, rtv::RobustnessConfig& cfg) {
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "trials") cfg.trials = v.get<int>();
      else if (key == "threads") cfg.threads = v.get<int>();
      else if (key == "levels") cfg.noise_levels_px = v.get<std::vector<double>>();
      else if (key == "counts") cfg.noisy_view_counts = v.get<std::vector<int>>();
      else if (key == "methods") {
        cfg.methods.clear();
        for (const auto& name : v.get<std::vector<std::string>>())
          cfg.methods.push_back(rtv::tri_method_from_string(name));
      } else if (key == "sigma-mm" || key == "wss-mm" || key == "fallback-weight" ||
                 key == "wss-compare" || key == "target") {
        apply_robust_key(cfg.robust, key, v);
      } else {
        apply_scene_key(cfg.scene, key, v);
      }
    } catch (const json::exception& e) {
      throw rtv::ParseError("config field '" + key + "': " + e.what());
    }
  }
}

void load_stability_config(const json& j, rtv::StabilityConfig& cfg) {
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "trials") cfg.trials = v.get<int>();
      else if (key == "threads") cfg.threads = v.get<int>();
      else if (key == "alphas") cfg.alphas = v.get<std::vector<double>>();
      else if (key == "steps") cfg.n_steps = v.get<int>();
      else if (key == "step-size") cfg.step_size = v.get<double>();
      else if (key == "base-noise") cfg.base_noise_px = v.get<double>();
      else if (key == "heavy-noise") cfg.heavy_noise_px = v.get<double>();
      else apply_scene_key(cfg.scene, key, v);
    } catch (const json::exception& e) {
      throw rtv::ParseError("config field '" + key + "': " + e.what());
    }
  }
}

int run_triangulate(const std::string& scene_path, const std::string& out_path,
                    bool standard, const rtv::RobustConfig& robust) {
  const rtv::SceneFile scene = rtv::load_scene(scene_path);

  json out;
  out["version"] = 1;
  json frames = json::array();
  for (std::size_t f = 0; f < scene.frames.size(); ++f) {
    const rtv::FrameDetections& frame = scene.frames[f];
    json joints = json::array();
    for (int j = 0; j < scene.n_joints; ++j) {
      rtv::PerViewPoints det(scene.rig.size());
      int n_valid = 0;
      for (std::size_t v = 0; v < scene.rig.size(); ++v) {
        if (!frame.valid[v][j]) continue;
        det[v] = frame.points[v][j];
        ++n_valid;
      }

      json entry;
      entry["joint"] = j;
      if (n_valid < 2) {
        entry["point"] = nullptr;
        entry["reason"] = "insufficient_views";
        joints.push_back(std::move(entry));
        continue;
      }

      try {
        if (standard) {
          std::vector<rtv::Observation> obs;
          for (std::size_t v = 0; v < scene.rig.size(); ++v)
            if (det[v]) obs.push_back({static_cast<int>(v), *det[v]});
          const rtv::Point3 x = rtv::triangulate_dlt(scene.rig, obs);
          entry["point"] = json::array({x.x(), x.y(), x.z()});
        } else {
          const rtv::RobustTriangulation result =
              rtv::robust_triangulate(scene.rig, det, robust);
          entry["point"] = json::array(
              {result.point.x(), result.point.y(), result.point.z()});
          entry["rejected"] = result.rejected;
          entry["wss_mm"] = result.wss_mm;
          json weights = json::array();
          for (const auto& [view, w] : result.view_weights) {
            json wj;
            wj["view"] = view;
            wj["weight"] = w;
            weights.push_back(std::move(wj));
          }
          entry["weights"] = std::move(weights);
        }
      } catch (const rtv::ParseError&) {
        throw;
      } catch (const rtv::ConfigInvalid&) {
        throw;
      } catch (const rtv::Error& e) {
        throw rtv::DegenerateGeometry("frame " + std::to_string(f) + ", joint " +
                                      std::to_string(j) + ": " + e.what());
      }
      joints.push_back(std::move(entry));
    }
    json fj;
    fj["joints"] = std::move(joints);
    frames.push_back(std::move(fj));
  }
  out["frames"] = std::move(frames);
  rtv::write_output(out_path, out.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust multi-view triangulation: point solver and synthetic studies"};
  app.require_subcommand(1);

  // triangulate
  auto* tri = app.add_subcommand(
      "triangulate", "Triangulate every joint of every frame in a scene file");
  std::string scene_path;
  std::string tri_out = "-";
  bool tri_standard = false;
  rtv::RobustConfig tri_robust;
  std::string tri_wss_compare = "rms";
  std::string tri_target = "wdlt";
  tri->add_option("--scene", scene_path, "Scene JSON file")->required();
  tri->add_option("--out", tri_out, "Output JSON path, - for stdout");
  tri->add_flag("--standard", tri_standard, "Plain unweighted triangulation");
  tri->add_option("--sigma-mm", tri_robust.sigma_mm, "Agreement bandwidth, mm");
  tri->add_option("--wss-mm", tri_robust.wss_threshold_mm, "Rejection threshold, mm");
  tri->add_option("--fallback-weight", tri_robust.fallback_weight,
                  "Uniform weight after rejection");
  tri->add_option("--wss-compare", tri_wss_compare, "rms or squared");
  tri->add_option("--target", tri_target, "wdlt or geomed");

  // sim-robustness
  auto* rob = app.add_subcommand(
      "sim-robustness", "Noise robustness sweep over triangulation methods");
  rtv::RobustnessConfig rob_cfg;
  std::string rob_out = "-";
  std::string rob_config_path;
  std::vector<std::string> rob_methods;
  std::string rob_wss_compare;
  std::string rob_target;
  rob->add_option("--config", rob_config_path, "JSON config; flags override");
  rob->add_option("--out", rob_out, "Output CSV path, - for stdout");
  rob->add_option("--seed", rob_cfg.seed, "Master seed");
  rob->add_option("--trials", rob_cfg.trials, "Trials per cell");
  rob->add_option("--threads", rob_cfg.threads, "Worker threads, 0 = auto");
  rob->add_option("--levels", rob_cfg.noise_levels_px, "Noise radii, px")
      ->delimiter(',');
  rob->add_option("--counts", rob_cfg.noisy_view_counts, "Corrupted view counts")
      ->delimiter(',');
  rob->add_option("--methods", rob_methods,
                  "standard, weights_no_wss, weights_wss")->delimiter(',');
  rob->add_option("--cameras", rob_cfg.scene.n_cameras, "Ring camera count");
  rob->add_option("--points", rob_cfg.scene.n_points, "Points per trial");
  rob->add_option("--ring-radius", rob_cfg.scene.ring_radius_m, "Ring radius, m");
  rob->add_option("--camera-height", rob_cfg.scene.camera_height_m, "Camera height, m");
  rob->add_option("--focal", rob_cfg.scene.focal_px, "Focal length, px");
  rob->add_option("--image-width", rob_cfg.scene.image_width, "Image width, px");
  rob->add_option("--image-height", rob_cfg.scene.image_height, "Image height, px");
  rob->add_option("--sigma-mm", rob_cfg.robust.sigma_mm, "Agreement bandwidth, mm");
  rob->add_option("--wss-mm", rob_cfg.robust.wss_threshold_mm, "Rejection threshold, mm");
  rob->add_option("--fallback-weight", rob_cfg.robust.fallback_weight,
                  "Uniform weight after rejection");
  rob->add_option("--wss-compare", rob_wss_compare, "rms or squared");
  rob->add_option("--target", rob_target, "wdlt or geomed");

  // sim-stability
  auto* stab = app.add_subcommand(
      "sim-stability", "Descent stability study over the gradient blend");
  rtv::StabilityConfig stab_cfg;
  std::string stab_out = "-";
  std::string stab_config_path;
  stab->add_option("--config", stab_config_path, "JSON config; flags override");
  stab->add_option("--out", stab_out, "Output CSV path, - for stdout");
  stab->add_option("--seed", stab_cfg.seed, "Master seed");
  stab->add_option("--trials", stab_cfg.trials, "Trials per alpha");
  stab->add_option("--threads", stab_cfg.threads, "Worker threads, 0 = auto");
  stab->add_option("--alphas", stab_cfg.alphas, "Gradient blend values")
      ->delimiter(',');
  stab->add_option("--steps", stab_cfg.n_steps, "Descent steps");
  stab->add_option("--step-size", stab_cfg.step_size, "Step size, normalized units");
  stab->add_option("--base-noise", stab_cfg.base_noise_px, "Noise on all views, px");
  stab->add_option("--heavy-noise", stab_cfg.heavy_noise_px, "Extra noise on one view, px");
  stab->add_option("--cameras", stab_cfg.scene.n_cameras, "Ring camera count");
  stab->add_option("--points", stab_cfg.scene.n_points, "Points per trial");
  stab->add_option("--ring-radius", stab_cfg.scene.ring_radius_m, "Ring radius, m");
  stab->add_option("--camera-height", stab_cfg.scene.camera_height_m, "Camera height, m");
  stab->add_option("--focal", stab_cfg.scene.focal_px, "Focal length, px");
  stab->add_option("--image-width", stab_cfg.scene.image_width, "Image width, px");
  stab->add_option("--image-height", stab_cfg.scene.image_height, "Image height, px");

  try {
    // Config files are applied before parsing so explicit flags win.
    const std::string config_path = find_config_path(argc, argv);
    if (!config_path.empty()) {
      const json config = load_config_json(config_path);
      // The subcommand decides the schema; peek at argv for it.
      std::string sub;
      for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (!a.empty() && a[0] != '-') {
          sub = a;
          break;
        }
      }
      if (sub == "sim-robustness") load_robustness_config(config, rob_cfg);
      else if (sub == "sim-stability") load_stability_config(config, stab_cfg);
      else throw rtv::ParseError("--config is only valid for sim subcommands");
    }

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::cerr << e.what() << "\n";
      return 2;
    }

    if (*tri) {
      tri_robust.wss_compare = wss_compare_from_string(tri_wss_compare);
      tri_robust.target = target_from_string(tri_target);
      return run_triangulate(scene_path, tri_out, tri_standard, tri_robust);
    }
    if (*rob) {
      if (!rob_methods.empty()) {
        rob_cfg.methods.clear();
        for (const std::string& name : rob_methods)
          rob_cfg.methods.push_back(rtv::tri_method_from_string(name));
      }
      if (!rob_wss_compare.empty())
        rob_cfg.robust.wss_compare = wss_compare_from_string(rob_wss_compare);
      if (!rob_target.empty())
        rob_cfg.robust.target = target_from_string(rob_target);
      const std::vector<rtv::RobustnessRow> rows = rtv::run_robustness_sweep(rob_cfg);
      rtv::write_output(rob_out, rtv::to_csv(rows));
      return 0;
    }
    if (*stab) {
      const std::vector<rtv::StabilityRow> rows = rtv::run_stability_study(stab_cfg);
      rtv::write_output(stab_out, rtv::to_csv(rows));
      return 0;
    }
    return 2;
  } catch (const rtv::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rtv::ConfigInvalid& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rtv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
