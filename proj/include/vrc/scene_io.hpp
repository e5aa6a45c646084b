#pragma once

// JSON scene files. Schema (unknown keys are rejected):
//   { "dimensionality": 2 | 3,
//     "name": string (optional),
//     "medium": { "sigma_s": r, "sigma_a": r },
//     "bounds": { "min": [..], "max": [..] },
//     "surfaces": [ { "vertices": [[..], ..], "emission": [r,g,b], "albedo": [r,g,b] } ],
//     "camera": { "position", "look_at", "up", "fov_deg", "width", "height" } (3D only) }

#include <optional>
#include <string>
#include <variant>

#include "vrc/scene.hpp"

namespace vrc {

// Malformed content; I/O failures throw IoError instead.
struct SceneFormatError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

template <int N>
struct SceneFile {
  std::string name;
  Scene<N> scene;
  std::optional<Camera> camera;
};

using AnyScene = std::variant<SceneFile<2>, SceneFile<3>>;

AnyScene parse_scene(const std::string& json_text);
AnyScene load_scene(const std::string& path);

}  // namespace vrc
