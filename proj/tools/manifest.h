#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace symplane::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kManifestName = "manifest.json";

struct RenderEntry {
  std::uint32_t view = 0;
  int rotation = 0;
  std::string png;  // relative to the manifest directory
  std::string frag;
};

// On-disk record of one object's run. Paths are stored relative to the
// manifest's directory so a run directory can be moved as a whole.
struct RunManifest {
  std::string object_id;
  std::string mesh;   // relative path of the input mesh
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<RenderEntry> renders;
  std::string feature_dir;      // FMAP directory, when extracted
  std::string vertex_features;  // VFEA file
  std::string planes;           // detection JSON
  std::string report;           // evaluation JSON

  // FNV-1a over the compact serialization of `config`, as 16 hex digits.
  [[nodiscard]] std::string config_hash() const;

  void save(const std::filesystem::path& dir) const;
  // Accepts the manifest file or its directory. Throws symplane::ParseError.
  static RunManifest load(const std::filesystem::path& path);
};

std::filesystem::path manifest_dir(const std::filesystem::path& path);

// `target` expressed relative to `base` when possible.
std::string relative_to(const std::filesystem::path& target, const std::filesystem::path& base);

} // namespace symplane::cli
