#include "manifest.h"

#include "symplane/errors.h"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace symplane::cli {

std::string RunManifest::config_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunManifest::save(const std::filesystem::path& dir) const {
  nlohmann::ordered_json j;
  j["tool_version"] = kToolVersion;
  j["object_id"] = object_id;
  j["mesh"] = mesh;
  j["config"] = config;
  j["config_hash"] = config_hash();
  nlohmann::ordered_json rs = nlohmann::ordered_json::array();
  for (const RenderEntry& r : renders) {
    rs.push_back({{"view", r.view}, {"rotation", r.rotation}, {"png", r.png}, {"frag", r.frag}});
  }
  j["renders"] = std::move(rs);
  j["feature_dir"] = feature_dir;
  j["vertex_features"] = vertex_features;
  j["planes"] = planes;
  j["report"] = report;

  std::filesystem::create_directories(dir);
  const std::filesystem::path path = dir / kManifestName;
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) {
      throw Error("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::filesystem::path manifest_dir(const std::filesystem::path& path) {
  return std::filesystem::is_directory(path) ? path : path.parent_path();
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  const std::filesystem::path file = std::filesystem::is_directory(path) ? path / kManifestName : path;
  std::ifstream in(file);
  if (!in) {
    throw ParseError("cannot open manifest " + file.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  RunManifest m;
  try {
    const auto j = nlohmann::ordered_json::parse(ss.str());
    m.object_id = j.at("object_id").get<std::string>();
    m.mesh = j.at("mesh").get<std::string>();
    m.config = j.value("config", nlohmann::ordered_json::object());
    for (const auto& r : j.at("renders")) {
      m.renders.push_back(
          {r.at("view").get<std::uint32_t>(), r.at("rotation").get<int>(), r.at("png").get<std::string>(),
           r.at("frag").get<std::string>()});
    }
    m.feature_dir = j.value("feature_dir", "");
    m.vertex_features = j.value("vertex_features", "");
    m.planes = j.value("planes", "");
    m.report = j.value("report", "");
    if (j.contains("config_hash") && j["config_hash"].get<std::string>() != m.config_hash()) {
      throw ParseError("manifest " + file.string() + ": config hash does not match its config");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest " + file.string() + ": " + e.what());
  }
  return m;
}

std::string relative_to(const std::filesystem::path& target, const std::filesystem::path& base) {
  std::error_code ec;
  const auto rel = std::filesystem::proximate(target, base, ec);
  return ec ? std::filesystem::absolute(target).string() : rel.generic_string();
}

} // namespace symplane::cli
