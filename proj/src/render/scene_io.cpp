#include "gtt/scene_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "gtt/errors.hpp"

namespace gtt {

using nlohmann::json;

namespace {

Vector3d to_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument(std::string(what) + ": expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Rgbd to_rgb(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument(std::string(what) + ": expected [r, g, b]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json from_vec3(const Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }
json from_rgb(const Rgbd& c) { return json::array({c(0), c(1), c(2)}); }

std::size_t resolve_material(const json& ref, const std::vector<Material>& materials) {
  if (ref.is_number_unsigned() || ref.is_number_integer()) {
    const auto i = ref.get<long long>();
    if (i < 0 || std::size_t(i) >= materials.size()) throw InvalidArgument("material index out of range");
    return std::size_t(i);
  }
  const auto name = ref.get<std::string>();
  for (std::size_t i = 0; i < materials.size(); ++i) {
    if (materials[i].name == name) return i;
  }
  throw InvalidArgument("unknown material '" + name + "'");
}

}  // namespace

Scene scene_from_json(const json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kSceneFormatVersion) {
      throw InvalidArgument("unsupported scene format_version " + std::to_string(version));
    }
    Scene s;
    s.environment = doc.contains("environment") ? to_rgb(doc["environment"], "environment") : Rgbd::Zero();
    for (const auto& m : doc.at("materials")) {
      Material mat;
      mat.name = m.value("name", "material" + std::to_string(s.materials.size()));
      mat.albedo = m.contains("albedo") ? to_rgb(m["albedo"], "albedo") : Rgbd::Zero();
      mat.emission = m.contains("emission") ? to_rgb(m["emission"], "emission") : Rgbd::Zero();
      s.materials.push_back(std::move(mat));
    }
    for (const auto& p : doc.at("primitives")) {
      const auto type = p.at("type").get<std::string>();
      Primitive prim;
      prim.material = resolve_material(p.at("material"), s.materials);
      if (type == "sphere") {
        prim.shape = Sphere{to_vec3(p.at("center"), "center"), p.at("radius").get<double>()};
      } else if (type == "triangle") {
        const auto& v = p.at("vertices");
        if (!v.is_array() || v.size() != 3) throw InvalidArgument("triangle needs 3 vertices");
        prim.shape = Triangle{to_vec3(v[0], "vertex"), to_vec3(v[1], "vertex"), to_vec3(v[2], "vertex")};
      } else {
        throw InvalidArgument("unknown primitive type '" + type + "'");
      }
      s.primitives.push_back(std::move(prim));
    }
    const auto& cam = doc.at("camera");
    s.camera.position = to_vec3(cam.at("position"), "camera.position");
    s.camera.forward = to_vec3(cam.at("forward"), "camera.forward");
    s.camera.up = to_vec3(cam.at("up"), "camera.up");
    s.camera.vertical_fov = cam.at("vertical_fov_degrees").get<double>() * std::numbers::pi / 180.0;
    const auto& res = cam.at("resolution");
    if (!res.is_array() || res.size() != 2) throw InvalidArgument("camera.resolution: expected [width, height]");
    s.camera.width = res[0].get<int>();
    s.camera.height = res[1].get<int>();
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("scene document: ") + e.what());
  }
}

json scene_to_json(const Scene& scene) {
  json doc;
  doc["format_version"] = kSceneFormatVersion;
  doc["environment"] = from_rgb(scene.environment);
  doc["materials"] = json::array();
  for (const auto& m : scene.materials) {
    doc["materials"].push_back({{"name", m.name}, {"albedo", from_rgb(m.albedo)}, {"emission", from_rgb(m.emission)}});
  }
  doc["primitives"] = json::array();
  for (const auto& p : scene.primitives) {
    json j;
    if (const auto* s = std::get_if<Sphere>(&p.shape)) {
      j = {{"type", "sphere"}, {"center", from_vec3(s->center)}, {"radius", s->radius}};
    } else {
      const auto& t = std::get<Triangle>(p.shape);
      j = {{"type", "triangle"}, {"vertices", json::array({from_vec3(t.v0), from_vec3(t.v1), from_vec3(t.v2)})}};
    }
    j["material"] = scene.materials.at(p.material).name;
    doc["primitives"].push_back(std::move(j));
  }
  doc["camera"] = {
      {"position", from_vec3(scene.camera.position)},
      {"forward", from_vec3(scene.camera.forward)},
      {"up", from_vec3(scene.camera.up)},
      {"vertical_fov_degrees", scene.camera.vertical_fov * 180.0 / std::numbers::pi},
      {"resolution", json::array({scene.camera.width, scene.camera.height})},
  };
  return doc;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open scene " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  return scene_from_json(doc);
}

void save_scene(const std::filesystem::path& path, const Scene& scene) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write scene " + path.string());
  out << scene_to_json(scene).dump(2) << "\n";
}

}  // namespace gtt
