#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mrtf::fed {

enum class Strategy { fedavg, feddf, mrtf };
enum class SplitKind { by_label, by_dirichlet };

std::string_view strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);
std::string_view split_name(SplitKind s);
std::optional<SplitKind> parse_split(std::string_view name);

struct DpConfig {
  /// Clip bound on the L2 norm of each client's parameter delta; unset means no clipping.
  std::optional<double> clip_norm;
  /// Standard deviation of the Gaussian noise added to the clipped delta.
  double sigma = 0.0;

  bool operator==(const DpConfig&) const = default;
};

/// Every knob of an experiment. Defaults are the desk-scale reference run;
/// the refinement defaults (temperature 4, 500 Adam steps at 3e-4, local
/// momentum 0.9, 5 warm-up rounds before clustering) follow the method.
struct ExperimentConfig {
  // Federation.
  std::size_t clients = 20;
  double participation = 0.25;
  std::size_t local_epochs = 3;
  std::size_t rounds = 30;
  std::size_t batch_size = 64;
  double local_lr = 0.05;
  double momentum = 0.9;
  bool weight_by_samples = false;
  DpConfig dp;

  // Server-side refinement.
  Strategy strategy = Strategy::mrtf;
  std::size_t distill_steps = 500;
  double distill_lr = 0.0003;
  std::size_t distill_batch_size = 64;
  double temperature = 4.0;
  bool use_rectified = true;
  bool use_cluster_refinery = true;
  std::size_t cluster_skip_rounds = 5;
  /// Centre pool features before the cosine clustering step.
  bool center_features = true;

  std::uint64_t seed = 0;

  // Data.
  SplitKind split = SplitKind::by_dirichlet;
  double alpha = 0.1;
  std::size_t classes_per_client = 3;
  std::size_t num_classes = 10;
  std::size_t input_dim = 32;
  std::vector<std::size_t> hidden_dims{64, 64};
  std::size_t train_per_class = 1000;
  std::size_t pool_per_class = 1000;
  double separation = 4.0;
  std::uint64_t data_seed = 0;
  bool domain_shift = false;
  std::uint64_t shift_seed = 1;
  std::string idx_train_images;
  std::string idx_train_labels;
  std::string idx_pool_images;
  std::string idx_pool_labels;

  // Divergence probe.
  std::vector<std::size_t> probe_pretrain_steps{0, 100, 400, 1600};
  std::size_t probe_steps = 50;
  std::size_t probe_clients = 10;
  double probe_lr = 0.05;
  double probe_iid_alpha = 10.0;
  double probe_noniid_alpha = 0.1;
  /// Blob sizes for the probe; ignored with IDX data.
  std::size_t probe_train_per_class = 200;
  std::size_t probe_test_per_class = 100;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  /// ceil(participation * clients), at least 1.
  std::size_t selected_per_round() const;
  bool uses_idx() const { return !idx_train_images.empty(); }

  bool operator==(const ExperimentConfig&) const = default;
};

}  // namespace mrtf::fed
