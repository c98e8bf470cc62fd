#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rtv/types.hpp"

namespace rtv {

/// Pixel-space detections of one time step, indexed [view][joint].
struct FrameDetections {
  std::vector<std::vector<Point2>> points;
  std::vector<std::vector<std::uint8_t>> valid;
};

/// A calibrated rig plus detection frames, as stored on disk.
struct SceneFile {
  CameraRig rig;
  int n_joints = 0;
  std::vector<FrameDetections> frames;
};

/// Canonical JSON form: alphabetical keys, only valid detections
/// listed, shortest-round-trip numbers. save/load are byte-stable:
/// loading a saved file and saving it again reproduces the bytes.
nlohmann::json scene_to_json(const SceneFile& scene);

/// Throws ParseError naming the offending field on malformed input,
/// and ConfigInvalid when the rig fails validation.
SceneFile scene_from_json(const nlohmann::json& j);

SceneFile load_scene(const std::string& path);
void save_scene(const SceneFile& scene, const std::string& path);

}  // namespace rtv
