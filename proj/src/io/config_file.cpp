#include "mrtf/io/config_file.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "mrtf/core/error.hpp"
#include "mrtf/io/reports.hpp"

namespace mrtf::io {

namespace {

using fed::ExperimentConfig;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ConfigError(std::string(key), "expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(std::string(key), "expected true or false, got '" + std::string(text) + "'");
}

std::vector<std::size_t> parse_list(std::string_view key, std::string_view text) {
  std::vector<std::size_t> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_number<std::size_t>(key, trim(text.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string join(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

struct Field {
  std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Field integer(T ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, std::string_view k, std::string_view v) { c.*member = parse_number<T>(k, v); },
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

Field real(double ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, std::string_view k, std::string_view v) {
            c.*member = parse_number<double>(k, v);
          },
          [member](const ExperimentConfig& c) { return format_double(c.*member); }};
}

Field boolean(bool ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, std::string_view k, std::string_view v) { c.*member = parse_bool(k, v); },
          [member](const ExperimentConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field text(std::string ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, std::string_view, std::string_view v) { c.*member = std::string(v); },
          [member](const ExperimentConfig& c) { return c.*member; }};
}

Field list(std::vector<std::size_t> ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, std::string_view k, std::string_view v) { c.*member = parse_list(k, v); },
          [member](const ExperimentConfig& c) { return join(c.*member); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    t.emplace_back("clients", integer(&ExperimentConfig::clients));
    t.emplace_back("participation", real(&ExperimentConfig::participation));
    t.emplace_back("local_epochs", integer(&ExperimentConfig::local_epochs));
    t.emplace_back("rounds", integer(&ExperimentConfig::rounds));
    t.emplace_back("batch_size", integer(&ExperimentConfig::batch_size));
    t.emplace_back("local_lr", real(&ExperimentConfig::local_lr));
    t.emplace_back("momentum", real(&ExperimentConfig::momentum));
    t.emplace_back("weight_by_samples", boolean(&ExperimentConfig::weight_by_samples));
    t.emplace_back("dp_clip",
                   Field{[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                           if (v == "none") {
                             c.dp.clip_norm.reset();
                           } else {
                             c.dp.clip_norm = parse_number<double>(k, v);
                           }
                         },
                         [](const ExperimentConfig& c) {
                           return c.dp.clip_norm ? format_double(*c.dp.clip_norm) : std::string("none");
                         }});
    t.emplace_back("dp_sigma", Field{[](ExperimentConfig& c, std::string_view k,
                                        std::string_view v) { c.dp.sigma = parse_number<double>(k, v); },
                                     [](const ExperimentConfig& c) { return format_double(c.dp.sigma); }});
    t.emplace_back("strategy", Field{[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                       auto s = fed::parse_strategy(v);
                                       if (!s) {
                                         throw ConfigError(std::string(k), "expected fedavg, feddf or mrtf, got '" +
                                                                               std::string(v) + "'");
                                       }
                                       c.strategy = *s;
                                     },
                                     [](const ExperimentConfig& c) { return std::string(fed::strategy_name(c.strategy)); }});
    t.emplace_back("distill_steps", integer(&ExperimentConfig::distill_steps));
    t.emplace_back("distill_lr", real(&ExperimentConfig::distill_lr));
    t.emplace_back("distill_batch_size", integer(&ExperimentConfig::distill_batch_size));
    t.emplace_back("temperature", real(&ExperimentConfig::temperature));
    t.emplace_back("use_rectified", boolean(&ExperimentConfig::use_rectified));
    t.emplace_back("use_cluster_refinery", boolean(&ExperimentConfig::use_cluster_refinery));
    t.emplace_back("cluster_skip_rounds", integer(&ExperimentConfig::cluster_skip_rounds));
    t.emplace_back("center_features", boolean(&ExperimentConfig::center_features));
    t.emplace_back("seed", integer(&ExperimentConfig::seed));
    t.emplace_back("split", Field{[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                    auto s = fed::parse_split(v);
                                    if (!s) {
                                      throw ConfigError(std::string(k),
                                                        "expected label or dirichlet, got '" + std::string(v) + "'");
                                    }
                                    c.split = *s;
                                  },
                                  [](const ExperimentConfig& c) { return std::string(fed::split_name(c.split)); }});
    t.emplace_back("alpha", real(&ExperimentConfig::alpha));
    t.emplace_back("classes_per_client", integer(&ExperimentConfig::classes_per_client));
    t.emplace_back("num_classes", integer(&ExperimentConfig::num_classes));
    t.emplace_back("input_dim", integer(&ExperimentConfig::input_dim));
    t.emplace_back("hidden_dims", list(&ExperimentConfig::hidden_dims));
    t.emplace_back("train_per_class", integer(&ExperimentConfig::train_per_class));
    t.emplace_back("pool_per_class", integer(&ExperimentConfig::pool_per_class));
    t.emplace_back("separation", real(&ExperimentConfig::separation));
    t.emplace_back("data_seed", integer(&ExperimentConfig::data_seed));
    t.emplace_back("domain_shift", boolean(&ExperimentConfig::domain_shift));
    t.emplace_back("shift_seed", integer(&ExperimentConfig::shift_seed));
    t.emplace_back("idx_train_images", text(&ExperimentConfig::idx_train_images));
    t.emplace_back("idx_train_labels", text(&ExperimentConfig::idx_train_labels));
    t.emplace_back("idx_pool_images", text(&ExperimentConfig::idx_pool_images));
    t.emplace_back("idx_pool_labels", text(&ExperimentConfig::idx_pool_labels));
    t.emplace_back("probe_pretrain_steps", list(&ExperimentConfig::probe_pretrain_steps));
    t.emplace_back("probe_steps", integer(&ExperimentConfig::probe_steps));
    t.emplace_back("probe_clients", integer(&ExperimentConfig::probe_clients));
    t.emplace_back("probe_lr", real(&ExperimentConfig::probe_lr));
    t.emplace_back("probe_iid_alpha", real(&ExperimentConfig::probe_iid_alpha));
    t.emplace_back("probe_noniid_alpha", real(&ExperimentConfig::probe_noniid_alpha));
    t.emplace_back("probe_train_per_class", integer(&ExperimentConfig::probe_train_per_class));
    t.emplace_back("probe_test_per_class", integer(&ExperimentConfig::probe_test_per_class));
    return t;
  }();
  return table;
}

const Field& field(std::string_view key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return f;
  }
  throw ConfigError(std::string(key), "unknown key");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& entry : fields()) k.push_back(entry.first);
    return k;
  }();
  return keys;
}

void set_config_value(fed::ExperimentConfig& config, std::string_view key, std::string_view value) {
  field(key).set(config, key, trim(value));
}

std::string get_config_value(const fed::ExperimentConfig& config, std::string_view key) {
  return field(key).get(config);
}

fed::ExperimentConfig parse_config(std::string_view text, fed::ExperimentConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line), "line " + std::to_string(line_no) + " is not key=value");
    }
    set_config_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  base.validate();
  return base;
}

fed::ExperimentConfig load_config(const std::filesystem::path& path, fed::ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

std::string serialize_config(const fed::ExperimentConfig& config) {
  std::string out;
  for (const auto& [name, f] : fields()) out += name + "=" + f.get(config) + "\n";
  return out;
}

}  // namespace mrtf::io
