#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "mrtf/fed/config.hpp"

namespace mrtf::io {

inline constexpr const char* kVersion = "0.1.0";

/// Everything needed to replay a run: the fully resolved config plus where and when it ran.
struct RunManifest {
  std::string command = "run";
  fed::ExperimentConfig config;
  std::string version = kVersion;
  std::string simd;
  std::string started_at;
  std::string finished_at;
  /// Output name -> file path.
  std::map<std::string, std::string> outputs;
};

std::string manifest_to_json(const RunManifest& manifest);
/// Throws ConfigError on unknown config keys or bad values, ValueError on malformed JSON.
RunManifest manifest_from_json(const std::string& text);

void save_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest load_manifest(const std::filesystem::path& path);

/// Current UTC time as ISO-8601.
std::string utc_timestamp();

}  // namespace mrtf::io
