#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrtf/core/matrix.hpp"
#include "mrtf/core/rng.hpp"
#include "mrtf/data/dataset.hpp"
#include "mrtf/data/partition.hpp"
#include "mrtf/fed/config.hpp"
#include "mrtf/nn/mlp.hpp"

namespace mrtf::refinery {
struct TeacherTargets;
}

namespace mrtf::fed {

/// Everything one communication round produced.
struct RoundState {
  std::size_t round = 0;
  nn::ParamVector global_before;
  std::vector<std::size_t> selected;
  std::vector<nn::ParamVector> local_models;
  std::vector<double> local_losses;
  nn::ParamVector aggregated;
  std::optional<nn::ParamVector> refined;
};

struct RoundMetrics {
  std::size_t round = 0;
  double acc_aggregated = 0.0;
  double acc_refined = 0.0;
  double acc_ensemble = 0.0;
  double mean_local_loss = 0.0;
  double u_t = 0.0;
  double gradient_variance = 0.0;
  double wallclock_seconds = 0.0;
};

struct RunOptions {
  std::size_t threads = 1;
  /// Called with the final teacher targets of each round that builds any.
  std::function<void(std::size_t round, const refinery::TeacherTargets&)> on_targets;
  /// Called after every round with its metrics.
  std::function<void(const RoundMetrics&)> on_round;
};

struct RunResult {
  std::vector<RoundMetrics> rounds;
  nn::ParamVector final_model;
  std::vector<std::string> warnings;
};

/// Uniform sample of ceil(R*K) distinct clients, ascending, deterministic in (seed, round).
std::vector<std::size_t> sample_clients(std::size_t clients, double participation, std::size_t round,
                                        std::uint64_t seed);

struct LocalResult {
  nn::ParamVector params;
  double mean_loss;
};

/// E epochs of shuffled minibatch SGD with momentum from `global`, fresh optimizer
/// state. The returned loss is the sample-weighted mean of the last epoch.
/// Deterministic in (config.seed, round, client_id).
LocalResult local_update(const nn::ParamVector& global, const data::ClientShard& shard, const ExperimentConfig& config,
                         std::size_t round);

/// `steps` minibatch SGD-with-momentum steps on `dataset`, cycling through freshly
/// shuffled passes. Fresh optimizer state; used for centralized training.
void sgd_steps(nn::ParamVector& params, const data::LabeledDataset& dataset, std::size_t steps, double lr,
               double momentum, std::size_t batch_size, Rng& rng);

/// Scales `delta` to L2 norm <= clip_norm, then adds N(0, sigma^2) to every entry.
std::vector<double> dp_sanitize(std::span<const double> delta, double clip_norm, double sigma, Rng& rng);

/// Weighted elementwise mean. Weights must be non-negative and sum to 1 within 1e-9.
/// The result does not depend on the order of the (model, weight) pairs.
nn::ParamVector aggregate_average(std::span<const nn::ParamVector> models, std::span<const double> weights);

/// Full T-round simulation. `pool` is required for feddf and mrtf; when given it is
/// also where accuracies are measured.
RunResult run_federated(const ExperimentConfig& config, const std::vector<data::ClientShard>& shards,
                        const data::UnlabeledPool* pool, const nn::ParamVector& initial, const RunOptions& options = {});

}  // namespace mrtf::fed
