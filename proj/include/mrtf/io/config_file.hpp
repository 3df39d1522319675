#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mrtf/fed/config.hpp"

// Flat key=value configuration. One entry per line, '#' starts a comment,
// whitespace around keys and values is ignored. Lists are comma-separated.

namespace mrtf::io {

/// Every recognised key, in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one key from its text form. Throws ConfigError naming the key on an unknown
/// key or a malformed value. Does not run whole-config validation.
void set_config_value(fed::ExperimentConfig& config, std::string_view key, std::string_view value);

/// Text form of one key, round-trippable through set_config_value.
std::string get_config_value(const fed::ExperimentConfig& config, std::string_view key);

/// Applies the entries of `text` on top of `base`, then validates.
fed::ExperimentConfig parse_config(std::string_view text, fed::ExperimentConfig base = {});

/// Reads and parses a config file. Throws ConfigError (key "config") when unreadable.
fed::ExperimentConfig load_config(const std::filesystem::path& path, fed::ExperimentConfig base = {});

/// Every key with its value, one per line, in canonical order.
std::string serialize_config(const fed::ExperimentConfig& config);

}  // namespace mrtf::io
