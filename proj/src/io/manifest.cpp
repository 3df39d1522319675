#include "mrtf/io/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mrtf/core/error.hpp"
#include "mrtf/io/config_file.hpp"

namespace mrtf::io {

std::string manifest_to_json(const RunManifest& manifest) {
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& key : config_keys()) config[key] = get_config_value(manifest.config, key);
  nlohmann::ordered_json j;
  j["command"] = manifest.command;
  j["version"] = manifest.version;
  j["seed"] = manifest.config.seed;
  j["simd"] = manifest.simd;
  j["started_at"] = manifest.started_at;
  j["finished_at"] = manifest.finished_at;
  j["outputs"] = manifest.outputs;
  j["config"] = std::move(config);
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValueError(std::string("manifest: ") + e.what());
  }
  RunManifest m;
  try {
    m.command = j.value("command", "run");
    m.version = j.value("version", "");
    m.simd = j.value("simd", "");
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    if (j.contains("outputs")) m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    for (const auto& [key, value] : j.at("config").items()) {
      set_config_value(m.config, key, value.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValueError(std::string("manifest: ") + e.what());
  }
  m.config.validate();
  return m;
}

void save_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw ValueError("cannot write " + path.string());
  out << manifest_to_json(manifest);
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValueError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return manifest_from_json(buffer.str());
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace mrtf::io
