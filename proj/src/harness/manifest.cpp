#include "gtt/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "gtt/errors.hpp"

namespace gtt {

using nlohmann::json;

StimulusManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open manifest " + path.string());
  StimulusManifest m;
  try {
    json doc;
    in >> doc;
    m.format_version = doc.at("format_version").get<int>();
    if (m.format_version != kManifestFormatVersion) {
      throw InvalidArgument("unsupported manifest format_version " + std::to_string(m.format_version));
    }
    m.root = path.parent_path() / doc.value("root", std::string("."));
    std::set<std::string> ids;
    for (const auto& e : doc.at("stimuli")) {
      Stimulus s;
      s.id = e.at("id").get<std::string>();
      s.kind = parse_kind(e.at("kind").get<std::string>());
      s.image_path = m.root / e.at("image").get<std::string>();
      s.provenance = e.value("provenance", "");
      if (e.contains("paired_reference") && !e["paired_reference"].is_null()) {
        s.paired_reference = m.root / e["paired_reference"].get<std::string>();
      }
      if (!ids.insert(s.id).second) throw InvalidArgument("duplicate stimulus id '" + s.id + "'");
      validate(s);
      m.entries.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  return m;
}

void save_manifest(const std::filesystem::path& path, const StimulusManifest& m) {
  json doc = {{"format_version", m.format_version}, {"root", "."}, {"stimuli", json::array()}};
  const auto base = std::filesystem::absolute(path).parent_path();
  for (const auto& s : m.entries) {
    json e = {{"id", s.id},
              {"kind", to_string(s.kind)},
              {"image", std::filesystem::relative(std::filesystem::absolute(s.image_path), base).generic_string()},
              {"provenance", s.provenance}};
    if (s.paired_reference) {
      e["paired_reference"] = std::filesystem::relative(std::filesystem::absolute(*s.paired_reference), base).generic_string();
    }
    doc["stimuli"].push_back(std::move(e));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write manifest " + path.string());
  out << doc.dump(2) << "\n";
}

}  // namespace gtt
