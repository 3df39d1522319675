#include "mrtf/fed/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include "mrtf/core/error.hpp"
#include "mrtf/diag/metrics.hpp"
#include "mrtf/nn/optim.hpp"
#include "mrtf/refinery/distill.hpp"
#include "mrtf/simd/kernels.hpp"

namespace mrtf::fed {

namespace {

constexpr double kWeightTolerance = 1e-9;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index writes its own
// slot, so the outcome does not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<std::size_t> sample_clients(std::size_t clients, double participation, std::size_t round,
                                        std::uint64_t seed) {
  ExperimentConfig probe;
  probe.clients = clients;
  probe.participation = participation;
  const std::size_t m = probe.selected_per_round();
  if (m < 1 || participation > 1.0) throw ValueError("sample_clients: ceil(R*K) must lie in [1, K]");
  std::vector<std::size_t> ids(clients);
  std::iota(ids.begin(), ids.end(), 0);
  auto rng = make_stream(seed, "sample-clients", {round});
  // Partial Fisher-Yates: the first m slots become the sample.
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, clients - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(m);
  std::sort(ids.begin(), ids.end());
  return ids;
}

LocalResult local_update(const nn::ParamVector& global, const data::ClientShard& shard, const ExperimentConfig& config,
                         std::size_t round) {
  const std::size_t n = shard.size();
  if (n == 0) throw TrainingError("local update on an empty shard", round, shard.client_id);
  auto rng = make_stream(config.seed, "local-update", {round, shard.client_id});
  nn::ParamVector params = global;
  auto state = nn::OptimizerState::sgd_momentum(params.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::min(config.batch_size, n);

  double epoch_loss = 0.0;
  for (std::size_t epoch = 0; epoch < config.local_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(start + batch, n);
      std::span<const std::size_t> idx(order.data() + start, stop - start);
      const auto mb = shard.dataset.subset(idx);
      try {
        auto [loss, grad] = nn::cross_entropy_loss_grad(params, mb.features, mb.labels);
        if (!std::isfinite(loss)) throw ValueError("non-finite training loss");
        nn::sgd_momentum_step(params, grad.values(), state, config.local_lr, config.momentum);
        epoch_loss += loss * static_cast<double>(idx.size());
      } catch (const ValueError& e) {
        throw TrainingError(std::string("local update diverged: ") + e.what(), round, shard.client_id);
      }
    }
    if (!all_finite(params.values())) {
      throw TrainingError("local update diverged to non-finite parameters", round, shard.client_id);
    }
  }
  return {std::move(params), epoch_loss / static_cast<double>(n)};
}

void sgd_steps(nn::ParamVector& params, const data::LabeledDataset& dataset, std::size_t steps, double lr,
               double momentum, std::size_t batch_size, Rng& rng) {
  if (steps == 0) return;
  if (dataset.size() == 0) throw ValueError("sgd_steps: empty dataset");
  auto state = nn::OptimizerState::sgd_momentum(params.size());
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::clamp<std::size_t>(batch_size, 1, order.size());
  std::size_t cursor = order.size();
  std::vector<std::size_t> picked(batch);
  for (std::size_t step = 0; step < steps; ++step) {
    for (auto& p : picked) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      p = order[cursor++];
    }
    const auto mb = dataset.subset(picked);
    auto [loss, grad] = nn::cross_entropy_loss_grad(params, mb.features, mb.labels);
    nn::sgd_momentum_step(params, grad.values(), state, lr, momentum);
  }
}

std::vector<double> dp_sanitize(std::span<const double> delta, double clip_norm, double sigma, Rng& rng) {
  if (!(clip_norm > 0.0)) throw ValueError("dp_sanitize: clip norm must be positive");
  if (!(sigma >= 0.0)) throw ValueError("dp_sanitize: sigma must be non-negative");
  std::vector<double> out(delta.begin(), delta.end());
  const double norm = std::sqrt(simd::squared_norm(out));
  if (norm > clip_norm) simd::scale(clip_norm / norm, out);
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : out) v += noise(rng);
  }
  return out;
}

nn::ParamVector aggregate_average(std::span<const nn::ParamVector> models, std::span<const double> weights) {
  if (models.empty()) throw ValueError("aggregate_average: no models");
  if (weights.size() != models.size()) throw DimensionError("aggregation weight count", models.size(), weights.size());
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValueError("aggregate_average: weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightTolerance) {
    throw ValueError("aggregate_average: weights sum to " + std::to_string(sum));
  }
  for (const auto& m : models) {
    if (!(m.arch() == models[0].arch())) throw ValueError("aggregate_average: models have different architectures");
  }

  // Accumulate in a canonical order of the (model, weight) pairs so any permutation
  // of the inputs yields the same bits.
  std::vector<std::size_t> order(models.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto va = models[a].values();
    auto vb = models[b].values();
    if (std::lexicographical_compare(va.begin(), va.end(), vb.begin(), vb.end())) return true;
    if (std::lexicographical_compare(vb.begin(), vb.end(), va.begin(), va.end())) return false;
    return weights[a] < weights[b];
  });

  nn::ParamVector out(models[0].arch());
  for (std::size_t k : order) simd::axpy(weights[k], models[k].values(), out.values());
  return out;
}

RunResult run_federated(const ExperimentConfig& config, const std::vector<data::ClientShard>& shards,
                        const data::UnlabeledPool* pool, const nn::ParamVector& initial, const RunOptions& options) {
  config.validate();
  if (shards.size() != config.clients) throw DimensionError("client shard count", config.clients, shards.size());
  if (config.strategy != Strategy::fedavg && pool == nullptr) {
    throw ValueError(std::string(strategy_name(config.strategy)) + " needs the server pool");
  }
  if (pool != nullptr && pool->features().cols() != initial.arch().input_dim) {
    throw DimensionError("pool feature count", initial.arch().input_dim, pool->features().cols());
  }

  RunResult result;
  nn::ParamVector global = initial;
  const std::size_t classes = initial.arch().num_classes;

  for (std::size_t t = 0; t < config.rounds; ++t) {
    const auto started = std::chrono::steady_clock::now();
    RoundState state;
    state.round = t;
    state.global_before = global;
    state.selected = sample_clients(config.clients, config.participation, t, config.seed);
    const std::size_t m = state.selected.size();
    state.local_models.resize(m);
    state.local_losses.resize(m);

    parallel_for(m, options.threads, [&](std::size_t i) {
      const auto& shard = shards[state.selected[i]];
      LocalResult local = local_update(global, shard, config, t);
      if (config.dp.clip_norm) {
        std::vector<double> delta(local.params.size());
        for (std::size_t p = 0; p < delta.size(); ++p) delta[p] = local.params.values()[p] - global.values()[p];
        auto rng = make_stream(config.seed, "dp-noise", {t, shard.client_id});
        delta = dp_sanitize(delta, *config.dp.clip_norm, config.dp.sigma, rng);
        for (std::size_t p = 0; p < delta.size(); ++p) local.params.values()[p] = global.values()[p] + delta[p];
      }
      state.local_models[i] = std::move(local.params);
      state.local_losses[i] = local.mean_loss;
    });

    std::vector<double> weights(m, 1.0 / static_cast<double>(m));
    if (config.weight_by_samples) {
      double total = 0.0;
      for (auto id : state.selected) total += static_cast<double>(shards[id].size());
      for (std::size_t i = 0; i < m; ++i) weights[i] = static_cast<double>(shards[state.selected[i]].size()) / total;
    }
    state.aggregated = aggregate_average(state.local_models, weights);

    std::optional<refinery::TeacherTargets> targets;
    try {
      switch (config.strategy) {
        case Strategy::fedavg:
          state.refined = state.aggregated;
          break;
        case Strategy::feddf: {
          auto outcome = refinery::feddf_round_refine(state, pool->features(), config);
          state.refined = std::move(outcome.model);
          targets = std::move(outcome.targets);
          break;
        }
        case Strategy::mrtf: {
          auto outcome = refinery::mrtf_round_refine(state, pool->features(), config);
          state.refined = std::move(outcome.model);
          targets = std::move(outcome.targets);
          for (auto& w : outcome.warnings) result.warnings.push_back(std::move(w));
          break;
        }
      }
    } catch (const ValueError& e) {
      throw TrainingError(std::string("server refinement failed: ") + e.what(), t, 0);
    }

    RoundMetrics metrics;
    metrics.round = t;
    double loss_sum = 0.0;
    for (double l : state.local_losses) loss_sum += l;
    metrics.mean_local_loss = loss_sum / static_cast<double>(m);
    metrics.u_t = refinery::compute_ut(state.local_losses, classes);
    metrics.gradient_variance = diag::gradient_variance(state.local_models, state.aggregated);
    if (pool != nullptr) {
      metrics.acc_aggregated = diag::pool_accuracy(state.aggregated, *pool);
      metrics.acc_refined = config.strategy == Strategy::fedavg ? metrics.acc_aggregated
                                                                : diag::pool_accuracy(*state.refined, *pool);
      if (!targets) {
        std::vector<Matrix> logits;
        logits.reserve(m);
        for (const auto& local : state.local_models) logits.push_back(nn::forward_logits(local, pool->features()));
        targets = refinery::avg_logi(logits, std::vector<double>(m, 1.0 / static_cast<double>(m)));
      }
      metrics.acc_ensemble = diag::targets_accuracy(targets->probs, *pool);
    } else {
      metrics.acc_aggregated = metrics.acc_refined = metrics.acc_ensemble = std::nan("");
    }
    if (targets && options.on_targets) options.on_targets(t, *targets);
    metrics.wallclock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (options.on_round) options.on_round(metrics);
    result.rounds.push_back(metrics);
    global = std::move(*state.refined);
  }
  result.final_model = std::move(global);
  return result;
}

}  // namespace mrtf::fed
