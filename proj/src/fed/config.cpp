#include "mrtf/fed/config.hpp"

#include <cmath>

#include "mrtf/core/error.hpp"

namespace mrtf::fed {

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::fedavg:
      return "fedavg";
    case Strategy::feddf:
      return "feddf";
    case Strategy::mrtf:
      return "mrtf";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  if (name == "fedavg") return Strategy::fedavg;
  if (name == "feddf") return Strategy::feddf;
  if (name == "mrtf") return Strategy::mrtf;
  return std::nullopt;
}

std::string_view split_name(SplitKind s) { return s == SplitKind::by_label ? "label" : "dirichlet"; }

std::optional<SplitKind> parse_split(std::string_view name) {
  if (name == "label") return SplitKind::by_label;
  if (name == "dirichlet") return SplitKind::by_dirichlet;
  return std::nullopt;
}

std::size_t ExperimentConfig::selected_per_round() const {
  // Guard against products like 0.1 * 30 landing a hair above an integer.
  const double raw = participation * static_cast<double>(clients);
  const auto m = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return m;
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(key, what);
  };
  require(clients >= 1, "clients", "must be >= 1");
  require(participation > 0.0 && participation <= 1.0, "participation", "must lie in (0, 1]");
  require(selected_per_round() >= 1, "participation", "ceil(participation * clients) must be >= 1");
  require(local_epochs >= 1, "local_epochs", "must be >= 1");
  require(rounds >= 1, "rounds", "must be >= 1");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(local_lr >= 0.0 && std::isfinite(local_lr), "local_lr", "must be a finite non-negative number");
  require(momentum >= 0.0 && momentum < 1.0, "momentum", "must lie in [0, 1)");
  require(distill_lr >= 0.0 && std::isfinite(distill_lr), "distill_lr", "must be a finite non-negative number");
  require(distill_batch_size >= 1, "distill_batch_size", "must be >= 1");
  require(temperature > 0.0 && std::isfinite(temperature), "temperature", "must be positive");
  require(!dp.clip_norm || *dp.clip_norm > 0.0, "dp_clip", "must be positive");
  require(dp.sigma >= 0.0 && std::isfinite(dp.sigma), "dp_sigma", "must be >= 0");
  require(dp.sigma == 0.0 || dp.clip_norm.has_value(), "dp_sigma", "noise requires dp_clip to be set");
  require(alpha > 0.0, "alpha", "must be positive");
  require(classes_per_client >= 1 && classes_per_client <= num_classes, "classes_per_client",
          "must lie in [1, num_classes]");
  require(num_classes >= 2, "num_classes", "must be >= 2");
  require(input_dim >= 2, "input_dim", "must be >= 2");
  require(!hidden_dims.empty(), "hidden_dims", "needs at least one hidden layer");
  for (auto h : hidden_dims) require(h >= 1, "hidden_dims", "every layer width must be >= 1");
  require(train_per_class >= 1, "train_per_class", "must be >= 1");
  require(pool_per_class >= 1, "pool_per_class", "must be >= 1");
  require(separation >= 0.0, "separation", "must be >= 0");
  require(idx_train_images.empty() == idx_train_labels.empty(), "idx_train_labels",
          "IDX training images and labels must be given together");
  require(idx_pool_images.empty() == idx_pool_labels.empty(), "idx_pool_labels",
          "IDX pool images and labels must be given together");
  require(!idx_pool_images.empty() || idx_train_images.empty(), "idx_pool_images",
          "IDX training data needs an IDX pool");
  require(probe_steps >= 1, "probe_steps", "must be >= 1");
  require(probe_clients >= 1, "probe_clients", "must be >= 1");
  require(!probe_pretrain_steps.empty(), "probe_pretrain_steps", "needs at least one value");
  require(probe_lr >= 0.0, "probe_lr", "must be >= 0");
  require(probe_iid_alpha > 0.0, "probe_iid_alpha", "must be positive");
  require(probe_noniid_alpha > 0.0, "probe_noniid_alpha", "must be positive");
  require(probe_train_per_class >= 1, "probe_train_per_class", "must be >= 1");
  require(probe_test_per_class >= 1, "probe_test_per_class", "must be >= 1");
}

}  // namespace mrtf::fed
