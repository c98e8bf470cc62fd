#include "rtv/scene_io.hpp"

#include <fstream>

#include "rtv/errors.hpp"

namespace rtv {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key))
    throw ParseError(path + ": missing field '" + key + "'");
  return obj.at(key);
}

double require_number(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) throw ParseError(path + "." + key + ": expected a number");
  return v.get<double>();
}

int require_int(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number_integer())
    throw ParseError(path + "." + key + ": expected an integer");
  return v.get<int>();
}

Mat3 parse_mat3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 9)
    throw ParseError(path + ": expected an array of 9 numbers (row-major)");
  Mat3 m;
  for (int i = 0; i < 9; ++i) {
    if (!v[i].is_number()) throw ParseError(path + ": expected a number at index " +
                                            std::to_string(i));
    m(i / 3, i % 3) = v[i].get<double>();
  }
  return m;
}

Point3 parse_vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3)
    throw ParseError(path + ": expected an array of 3 numbers");
  for (int i = 0; i < 3; ++i)
    if (!v[i].is_number())
      throw ParseError(path + ": expected a number at index " + std::to_string(i));
  return Point3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

json mat3_to_json(const Mat3& m) {
  json a = json::array();
  for (int i = 0; i < 9; ++i) a.push_back(m(i / 3, i % 3));
  return a;
}

json vec3_to_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

}  // namespace

json scene_to_json(const SceneFile& scene) {
  json j;
  j["version"] = 1;
  j["n_joints"] = scene.n_joints;

  json cameras = json::array();
  for (const Camera& cam : scene.rig.cameras) {
    json c;
    c["K"] = mat3_to_json(cam.K);
    c["R"] = mat3_to_json(cam.R);
    c["t"] = vec3_to_json(cam.t);
    c["width"] = cam.width;
    c["height"] = cam.height;
    cameras.push_back(std::move(c));
  }
  j["cameras"] = std::move(cameras);

  json frames = json::array();
  for (const FrameDetections& frame : scene.frames) {
    json detections = json::array();
    for (std::size_t v = 0; v < frame.points.size(); ++v) {
      json joints = json::array();
      for (std::size_t jt = 0; jt < frame.points[v].size(); ++jt) {
        if (!frame.valid[v][jt]) continue;
        json d;
        d["joint"] = static_cast<int>(jt);
        d["u"] = frame.points[v][jt].x();
        d["v"] = frame.points[v][jt].y();
        joints.push_back(std::move(d));
      }
      json view_entry;
      view_entry["view"] = static_cast<int>(v);
      view_entry["joints"] = std::move(joints);
      detections.push_back(std::move(view_entry));
    }
    json f;
    f["detections"] = std::move(detections);
    frames.push_back(std::move(f));
  }
  j["frames"] = std::move(frames);
  return j;
}

SceneFile scene_from_json(const json& j) {
  SceneFile scene;
  if (!j.is_object()) throw ParseError("scene: expected a JSON object");

  const json& cameras = require(j, "cameras", "scene");
  if (!cameras.is_array() || cameras.size() < 2)
    throw ParseError("scene.cameras: expected an array of at least 2 cameras");
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const std::string path = "scene.cameras[" + std::to_string(i) + "]";
    const json& c = cameras[i];
    Camera cam;
    cam.K = parse_mat3(require(c, "K", path), path + ".K");
    cam.R = parse_mat3(require(c, "R", path), path + ".R");
    cam.t = parse_vec3(require(c, "t", path), path + ".t");
    cam.width = require_int(c, "width", path);
    cam.height = require_int(c, "height", path);
    scene.rig.cameras.push_back(cam);
  }
  scene.rig.validate();

  scene.n_joints = require_int(j, "n_joints", "scene");
  if (scene.n_joints <= 0) throw ParseError("scene.n_joints: must be positive");

  const json& frames = require(j, "frames", "scene");
  if (!frames.is_array()) throw ParseError("scene.frames: expected an array");
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const std::string fpath = "scene.frames[" + std::to_string(f) + "]";
    FrameDetections frame;
    frame.points.assign(scene.rig.size(),
                        std::vector<Point2>(scene.n_joints, Point2::Zero()));
    frame.valid.assign(scene.rig.size(),
                       std::vector<std::uint8_t>(scene.n_joints, 0));

    const json& detections = require(frames[f], "detections", fpath);
    if (!detections.is_array())
      throw ParseError(fpath + ".detections: expected an array");
    for (std::size_t d = 0; d < detections.size(); ++d) {
      const std::string dpath = fpath + ".detections[" + std::to_string(d) + "]";
      const int view = require_int(detections[d], "view", dpath);
      if (view < 0 || static_cast<std::size_t>(view) >= scene.rig.size())
        throw ParseError(dpath + ".view: index " + std::to_string(view) +
                         " out of range");
      const json& joints = require(detections[d], "joints", dpath);
      if (!joints.is_array()) throw ParseError(dpath + ".joints: expected an array");
      for (std::size_t k = 0; k < joints.size(); ++k) {
        const std::string jpath = dpath + ".joints[" + std::to_string(k) + "]";
        const int joint = require_int(joints[k], "joint", jpath);
        if (joint < 0 || joint >= scene.n_joints)
          throw ParseError(jpath + ".joint: index " + std::to_string(joint) +
                           " out of range");
        frame.points[view][joint] =
            Point2(require_number(joints[k], "u", jpath),
                   require_number(joints[k], "v", jpath));
        frame.valid[view][joint] = 1;
      }
    }
    scene.frames.push_back(std::move(frame));
  }
  return scene;
}

SceneFile load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scene file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError("scene file '" + path + "': " + e.what());
  }
  return scene_from_json(j);
}

void save_scene(const SceneFile& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << scene_to_json(scene).dump(2) << "\n";
}

}  // namespace rtv
