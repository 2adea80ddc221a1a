#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gtt/scene.hpp"

namespace gtt {

inline constexpr int kSceneFormatVersion = 1;

/// Scene documents are JSON; see docs/scene_format.md.
Scene scene_from_json(const nlohmann::json& doc);
nlohmann::json scene_to_json(const Scene& scene);

Scene load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const Scene& scene);

}  // namespace gtt
