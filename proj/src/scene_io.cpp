#include "vrc/scene_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace vrc {

namespace {

using json = nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw SceneFormatError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw SceneFormatError(where + ": unknown field '" + key + "'");
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw SceneFormatError(where + ": missing field '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw SceneFormatError(where + ": expected a number");
  return v.get<double>();
}

template <int N>
Vec<N> vec(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != N)
    throw SceneFormatError(where + ": expected " + std::to_string(N) + " numbers");
  Vec<N> out;
  for (int i = 0; i < N; ++i) out[i] = number(v[i], where);
  return out;
}

Rgb rgb(const json& v, const std::string& where) {
  if (v.is_number()) return Rgb::gray(v.get<double>());
  const Vec3 c = vec<3>(v, where);
  return {c[0], c[1], c[2]};
}

template <int N>
SceneFile<N> parse_dim(const json& root) {
  const json& jm = require(root, "medium", "scene");
  check_keys(jm, {"sigma_s", "sigma_a"}, "medium");
  Medium medium{number(require(jm, "sigma_s", "medium"), "medium.sigma_s"),
                number(require(jm, "sigma_a", "medium"), "medium.sigma_a")};

  const json& jb = require(root, "bounds", "scene");
  check_keys(jb, {"min", "max"}, "bounds");
  Bounds<N> bounds{vec<N>(require(jb, "min", "bounds"), "bounds.min"),
                   vec<N>(require(jb, "max", "bounds"), "bounds.max")};

  std::vector<Surface<N>> surfaces;
  if (root.contains("surfaces")) {
    const json& js = root.at("surfaces");
    if (!js.is_array()) throw SceneFormatError("surfaces: expected an array");
    for (std::size_t i = 0; i < js.size(); ++i) {
      const std::string where = "surfaces[" + std::to_string(i) + "]";
      check_keys(js[i], {"vertices", "emission", "albedo"}, where);
      const json& jv = require(js[i], "vertices", where);
      if (!jv.is_array() || jv.size() != N)
        throw SceneFormatError(where + ".vertices: expected " + std::to_string(N) + " points");
      Surface<N> s;
      for (int k = 0; k < N; ++k) s.vertices[k] = vec<N>(jv[k], where + ".vertices");
      if (js[i].contains("emission")) s.emission = rgb(js[i].at("emission"), where + ".emission");
      if (js[i].contains("albedo")) s.albedo = rgb(js[i].at("albedo"), where + ".albedo");
      surfaces.push_back(s);
    }
  }

  std::optional<Camera> camera;
  if (root.contains("camera")) {
    if constexpr (N == 2) {
      throw SceneFormatError("camera: 2D scenes render fields, not images");
    } else {
      const json& jc = root.at("camera");
      check_keys(jc, {"position", "look_at", "up", "fov_deg", "width", "height"}, "camera");
      Camera c;
      c.position = vec<3>(require(jc, "position", "camera"), "camera.position");
      c.look_at = vec<3>(require(jc, "look_at", "camera"), "camera.look_at");
      if (jc.contains("up")) c.up = vec<3>(jc.at("up"), "camera.up");
      if (jc.contains("fov_deg")) c.fov_deg = number(jc.at("fov_deg"), "camera.fov_deg");
      if (jc.contains("width")) c.width = static_cast<int>(number(jc.at("width"), "camera.width"));
      if (jc.contains("height")) c.height = static_cast<int>(number(jc.at("height"), "camera.height"));
      if (c.width < 1 || c.height < 1 || !(c.fov_deg > 0.0 && c.fov_deg < 180.0))
        throw SceneFormatError("camera: invalid resolution or field of view");
      camera = c;
    }
  }

  try {
    return SceneFile<N>{root.value("name", std::string{}), Scene<N>(std::move(surfaces), medium, bounds), camera};
  } catch (const SceneFormatError&) {
    throw;
  } catch (const Error& e) {
    throw SceneFormatError(e.what());
  }
}

}  // namespace

AnyScene parse_scene(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SceneFormatError(std::string("scene is not valid JSON: ") + e.what());
  }
  check_keys(root, {"dimensionality", "name", "medium", "bounds", "surfaces", "camera"}, "scene");
  if (root.contains("name") && !root.at("name").is_string()) throw SceneFormatError("name: expected a string");
  const json& jd = require(root, "dimensionality", "scene");
  if (!jd.is_number_integer()) throw SceneFormatError("dimensionality: expected 2 or 3");
  const int dim = jd.get<int>();
  if (dim == 2) return parse_dim<2>(root);
  if (dim == 3) return parse_dim<3>(root);
  throw SceneFormatError("dimensionality: expected 2 or 3");
}

AnyScene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

}  // namespace vrc
