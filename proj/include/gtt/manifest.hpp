#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gtt/protocol.hpp"

namespace gtt {

inline constexpr int kManifestFormatVersion = 1;

/// Stimulus pool on disk:
///   {"format_version": 1, "root": "<dir>", "stimuli": [
///     {"id", "kind": "real"|"synthetic", "image", "provenance", "paired_reference"?}]}
/// Relative paths resolve against root, which itself resolves against the
/// manifest's directory.
struct StimulusManifest {
  int format_version = kManifestFormatVersion;
  std::filesystem::path root;
  std::vector<Stimulus> entries;
};

/// Throws InvalidArgument on duplicate ids or missing/undecodable images.
StimulusManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const StimulusManifest& manifest);

}  // namespace gtt
