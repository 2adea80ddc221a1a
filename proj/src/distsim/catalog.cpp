#include <cmath>
#include <fstream>

#include <json.hpp>

#include "gtt/distsim.hpp"
#include "gtt/errors.hpp"

namespace gtt {

using nlohmann::json;

namespace {

double bandwidth_from(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw InvalidArgument("bandwidth must be a number or \"inf\"");
  }
  return j.get<double>();
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

SystemArchetype archetype_from(const json& j) {
  SystemArchetype a;
  a.name = j.at("name").get<std::string>();
  a.node_count = j.at("node_count").get<std::uint64_t>();
  a.gflops_per_node = j.at("gflops_per_node").get<double>();
  a.gpu_render_speedup = j.value("gpu_render_speedup", 1.0);
  a.link_latency_s = j.at("link_latency_s").get<double>();
  a.bandwidth_bytes_per_s = bandwidth_from(j.at("bandwidth_bytes_per_s"));
  a.interactive = j.at("interactive").get<bool>();
  a.geometry_bytes_per_worker = j.value("geometry_bytes_per_worker", 0.0);
  a.all_to_all_latency_s = optional_field<double>(j, "all_to_all_latency_s");
  a.catalog_peak_tflops = optional_field<double>(j, "peak_tflops");
  a.catalog_sustained_tflops = optional_field<double>(j, "sustained_tflops");
  if (j.contains("physics_speedup") && !j["physics_speedup"].is_null()) {
    const auto& r = j["physics_speedup"];
    a.physics_speedup = std::pair{r.at(0).get<double>(), r.at(1).get<double>()};
  }
  a.notes = j.value("notes", "");
  return a;
}

}  // namespace

std::vector<SystemArchetype> load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open preset catalog " + path.string());
  std::vector<SystemArchetype> catalog;
  try {
    json doc;
    in >> doc;
    for (const auto& entry : doc.at("archetypes")) catalog.push_back(archetype_from(entry));
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  for (const auto& a : catalog) {
    validate(a);
    if (a.catalog_peak_tflops) {
      const double nominal = nominal_peak_tflops(a);
      if (std::abs(nominal - *a.catalog_peak_tflops) > 0.002 * *a.catalog_peak_tflops) {
        throw InvalidArgument(a.name + ": listed peak disagrees with node_count x gflops_per_node by more than 0.2%");
      }
    }
  }
  return catalog;
}

const SystemArchetype& find_archetype(const std::vector<SystemArchetype>& catalog, const std::string& name) {
  for (const auto& a : catalog) {
    if (a.name == name) return a;
  }
  throw NotFound("no archetype named '" + name + "'");
}

}  // namespace gtt
