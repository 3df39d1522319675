#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "mrtf/core/error.hpp"
#include "mrtf/core/rng.hpp"
#include "mrtf/data/blobs.hpp"
#include "mrtf/diag/metrics.hpp"
#include "mrtf/fed/engine.hpp"
#include "mrtf/fed/scenario.hpp"
#include "mrtf/nn/optim.hpp"
#include "mrtf/refinery/teachers.hpp"

using namespace mrtf;
using namespace mrtf::fed;

namespace {

nn::ParamVector filled(const nn::MlpArch& arch, double v) {
  nn::ParamVector p(arch);
  std::fill(p.values().begin(), p.values().end(), v);
  return p;
}

double l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

ExperimentConfig small_config(Strategy strategy) {
  ExperimentConfig c;
  c.strategy = strategy;
  c.clients = 6;
  c.participation = 0.5;
  c.rounds = 3;
  c.local_epochs = 1;
  c.batch_size = 16;
  c.num_classes = 4;
  c.input_dim = 6;
  c.hidden_dims = {10};
  c.train_per_class = 30;
  c.pool_per_class = 20;
  c.distill_steps = 15;
  c.distill_batch_size = 16;
  c.cluster_skip_rounds = 1;
  c.alpha = 0.5;
  return c;
}

}  // namespace

TEST(SampleClients, SizesAndDeterminism) {
  EXPECT_EQ(sample_clients(7, 1.0, 3, 9), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(sample_clients(100, 0.1, 0, 1).size(), 10u);
  EXPECT_EQ(sample_clients(30, 0.1, 0, 1).size(), 3u);
  EXPECT_EQ(sample_clients(20, 0.25, 4, 5), sample_clients(20, 0.25, 4, 5));
  EXPECT_EQ(sample_clients(10, 0.01, 0, 0).size(), 1u);
  EXPECT_THROW(sample_clients(10, 1.5, 0, 0), ValueError);
}

TEST(SampleClients, DistinctSortedAndRoughlyUniform) {
  std::vector<int> hits(20, 0);
  for (std::size_t round = 0; round < 2000; ++round) {
    const auto s = sample_clients(20, 0.25, round, 3);
    ASSERT_EQ(s.size(), 5u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 5u);
    for (auto id : s) ++hits[id];
  }
  // Each client is picked with probability 1/4: 500 expected, sd about 19.
  for (int h : hits) EXPECT_NEAR(h, 500, 100);
}

TEST(LocalUpdate, ZeroLearningRateKeepsTheModel) {
  const auto shard = data::partition_by_dirichlet(data::generate_blobs({3, 4, 20, 4.0, 1}), 1, 1.0, 0)[0];
  ExperimentConfig c;
  c.local_lr = 0.0;
  c.local_epochs = 2;
  const auto global = nn::init_params({4, {8}, 3}, 2);
  EXPECT_EQ(local_update(global, shard, c, 0).params, global);
}

TEST(LocalUpdate, SingleSampleOverfits) {
  const auto src = data::generate_blobs({3, 4, 1, 4.0, 1});
  data::ClientShard shard{0, src.subset(std::vector<std::size_t>{1}), {1}};
  ExperimentConfig c;
  c.local_epochs = 200;
  c.local_lr = 0.1;
  const auto r = local_update(nn::init_params({4, {8}, 3}, 3), shard, c, 0);
  EXPECT_LT(r.mean_loss, 0.01);
}

TEST(LocalUpdate, DeterministicPerClientStream) {
  const auto src = data::generate_blobs({3, 4, 20, 4.0, 1});
  auto shards = data::partition_by_dirichlet(src, 2, 1.0, 0);
  ExperimentConfig c;
  const auto global = nn::init_params({4, {8}, 3}, 2);
  auto twin = shards[0];
  EXPECT_EQ(local_update(global, shards[0], c, 4).params, local_update(global, twin, c, 4).params);
  twin.client_id = 1;
  EXPECT_NE(local_update(global, shards[0], c, 4).params, local_update(global, twin, c, 4).params);
  EXPECT_NE(local_update(global, shards[0], c, 4).params, local_update(global, shards[0], c, 5).params);
}

TEST(LocalUpdate, DivergenceCarriesRoundAndClient) {
  const auto src = data::generate_blobs({3, 4, 20, 40.0, 1});
  auto shard = data::partition_by_dirichlet(src, 1, 1.0, 0)[0];
  shard.client_id = 7;
  ExperimentConfig c;
  c.local_lr = 1e300;
  try {
    local_update(nn::init_params({4, {8}, 3}, 2), shard, c, 3);
    FAIL() << "expected divergence";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.round(), 3u);
    EXPECT_EQ(e.client(), 7u);
  }
}

TEST(SgdStep, PermutingCoordinatesPermutesTheUpdate) {
  const nn::MlpArch arch{2, {3}, 2};
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  std::vector<double> theta(arch.param_count()), grad(theta.size());
  for (auto& v : theta) v = n(rng);
  for (auto& v : grad) v = n(rng);
  std::vector<std::size_t> perm(theta.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> theta_p(theta.size()), grad_p(theta.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    theta_p[i] = theta[perm[i]];
    grad_p[i] = grad[perm[i]];
  }
  nn::ParamVector a(arch, theta), b(arch, theta_p);
  auto sa = nn::OptimizerState::sgd_momentum(a.size());
  auto sb = nn::OptimizerState::sgd_momentum(b.size());
  for (int step = 0; step < 3; ++step) {
    nn::sgd_momentum_step(a, grad, sa, 0.1, 0.9);
    nn::sgd_momentum_step(b, grad_p, sb, 0.1, 0.9);
  }
  for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(b.values()[i], a.values()[perm[i]]);
}

TEST(DpSanitize, ClippingExamples) {
  Rng rng = make_stream(0, "test");
  const std::vector<double> small{0.3, -0.4};
  EXPECT_EQ(dp_sanitize(small, 1.0, 0.0, rng), small);
  const std::vector<double> big{1.2, -1.6};  // norm 2
  const auto clipped = dp_sanitize(big, 1.0, 0.0, rng);
  EXPECT_NEAR(l2(clipped), 1.0, 1e-15);
  EXPECT_NEAR(clipped[0] / clipped[1], big[0] / big[1], 1e-15);
  EXPECT_THROW(dp_sanitize(big, 0.0, 0.0, rng), ValueError);
  EXPECT_THROW(dp_sanitize(big, 1.0, -1.0, rng), ValueError);
}

TEST(DpSanitize, NoiseIsCentred) {
  Rng rng = make_stream(1, "test");
  const std::vector<double> delta{3.0, 4.0};  // clipped to (0.6, 0.8)
  double mean = 0.0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) mean += dp_sanitize(delta, 1.0, 0.01, rng)[0] - 0.6;
  mean /= trials;
  EXPECT_LT(std::abs(mean), 3.0 * 0.01 / std::sqrt(trials));
}

TEST(Aggregate, Examples) {
  const nn::MlpArch arch{2, {2}, 2};
  const auto a = filled(arch, 0.0), b = filled(arch, 1.0);
  const std::vector<nn::ParamVector> ab{a, b};
  EXPECT_EQ(aggregate_average(ab, std::vector<double>{0.5, 0.5}), filled(arch, 0.5));
  EXPECT_EQ(aggregate_average(ab, std::vector<double>{1.0, 0.0}), a);
  const auto r = nn::init_params(arch, 1);
  const std::vector<nn::ParamVector> same{r, r, r};
  const auto avg = aggregate_average(same, std::vector<double>{0.2, 0.3, 0.5});
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(avg.values()[i], r.values()[i], 1e-15);

  EXPECT_THROW(aggregate_average(ab, std::vector<double>{0.5, 0.5 + 1e-8}), ValueError);
  EXPECT_THROW(aggregate_average(ab, std::vector<double>{1.0}), DimensionError);
  const std::vector<nn::ParamVector> mixed{a, filled({2, {3}, 2}, 0.0)};
  EXPECT_THROW(aggregate_average(mixed, std::vector<double>{0.5, 0.5}), ValueError);
}

TEST(Aggregate, PermutationInvariantBitExact) {
  const nn::MlpArch arch{5, {7}, 3};
  std::vector<nn::ParamVector> models;
  std::vector<double> weights;
  for (std::uint64_t k = 0; k < 6; ++k) {
    models.push_back(nn::init_params(arch, k));
    weights.push_back(0.1 * static_cast<double>(k + 1));
  }
  const double s = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= s;
  const auto base = aggregate_average(models, weights);
  std::mt19937_64 rng(8);
  std::vector<std::size_t> perm(models.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<nn::ParamVector> pm;
    std::vector<double> pw;
    for (auto i : perm) {
      pm.push_back(models[i]);
      pw.push_back(weights[i]);
    }
    EXPECT_EQ(aggregate_average(pm, pw), base);
  }
}

TEST(RunFederated, SingleClientFedAvgIsItsLocalUpdate) {
  auto c = small_config(Strategy::fedavg);
  c.clients = 1;
  c.participation = 1.0;
  c.rounds = 1;
  const auto sc = build_scenario(c);
  const auto r = run_federated(c, sc.shards, &sc.pool, sc.initial);
  EXPECT_EQ(r.final_model, local_update(sc.initial, sc.shards[0], c, 0).params);
}

TEST(RunFederated, FedAvgReportsAggregatedAsRefined) {
  const auto c = small_config(Strategy::fedavg);
  const auto sc = build_scenario(c);
  const auto r = run_federated(c, sc.shards, &sc.pool, sc.initial);
  ASSERT_EQ(r.rounds.size(), 3u);
  for (const auto& m : r.rounds) {
    EXPECT_EQ(m.acc_refined, m.acc_aggregated);
    EXPECT_GE(m.u_t, 0.25);
    EXPECT_LE(m.u_t, 1.0);
    EXPECT_GE(m.gradient_variance, 0.0);
  }
  EXPECT_NO_THROW(run_federated(c, sc.shards, nullptr, sc.initial));
}

TEST(RunFederated, RefinementNeedsThePool) {
  const auto c = small_config(Strategy::mrtf);
  const auto sc = build_scenario(c);
  EXPECT_THROW(run_federated(c, sc.shards, nullptr, sc.initial), ValueError);
  std::vector<data::ClientShard> fewer(sc.shards.begin(), sc.shards.end() - 1);
  EXPECT_THROW(run_federated(c, fewer, &sc.pool, sc.initial), DimensionError);
}

TEST(RunFederated, IdenticalClientsHaveZeroGradientVariance) {
  auto c = small_config(Strategy::fedavg);
  c.clients = 4;
  c.participation = 1.0;
  c.rounds = 2;
  const auto sc = build_scenario(c);
  std::vector<data::ClientShard> clones(4, sc.shards[0]);
  for (auto& s : clones) s.client_id = 0;  // same data and same RNG stream
  const auto r = run_federated(c, clones, &sc.pool, sc.initial);
  for (const auto& m : r.rounds) EXPECT_EQ(m.gradient_variance, 0.0);
}

TEST(RunFederated, FeddfOnOwnPredictionsStaysNearTheAggregate) {
  // One client with R=1: AvgLogi targets are the aggregated model's own predictions.
  auto c = small_config(Strategy::feddf);
  c.clients = 1;
  c.participation = 1.0;
  c.rounds = 1;
  const auto sc = build_scenario(c);
  const auto r = run_federated(c, sc.shards, &sc.pool, sc.initial);
  const auto agg = local_update(sc.initial, sc.shards[0], c, 0).params;
  double drift = 0.0;
  for (std::size_t i = 0; i < agg.size(); ++i) drift = std::max(drift, std::abs(agg.values()[i] - r.final_model.values()[i]));
  EXPECT_LE(drift, c.distill_lr * static_cast<double>(c.distill_steps));
}

TEST(RunFederated, ThreadCountDoesNotChangeAnyBit) {
  for (auto strategy : {Strategy::fedavg, Strategy::feddf, Strategy::mrtf}) {
    auto c = small_config(strategy);
    c.dp.clip_norm = 5.0;
    c.dp.sigma = 0.001;
    const auto sc = build_scenario(c);
    RunOptions serial, parallel;
    parallel.threads = 8;
    const auto one = run_federated(c, sc.shards, &sc.pool, sc.initial, serial);
    const auto many = run_federated(c, sc.shards, &sc.pool, sc.initial, parallel);
    EXPECT_EQ(one.final_model, many.final_model) << strategy_name(strategy);
    for (std::size_t t = 0; t < one.rounds.size(); ++t) {
      EXPECT_EQ(one.rounds[t].acc_refined, many.rounds[t].acc_refined);
      EXPECT_EQ(one.rounds[t].gradient_variance, many.rounds[t].gradient_variance);
    }
  }
}

TEST(RunFederated, CallbacksSeeEveryRound) {
  const auto c = small_config(Strategy::mrtf);
  const auto sc = build_scenario(c);
  std::vector<std::size_t> rounds, target_rounds;
  RunOptions opts;
  opts.on_round = [&](const RoundMetrics& m) { rounds.push_back(m.round); };
  opts.on_targets = [&](std::size_t t, const refinery::TeacherTargets& q) {
    target_rounds.push_back(t);
    EXPECT_EQ(q.probs.rows(), sc.pool.size());
    EXPECT_EQ(q.source, t >= c.cluster_skip_rounds ? refinery::TargetSource::refined
                                                    : refinery::TargetSource::rectified);
  };
  run_federated(c, sc.shards, &sc.pool, sc.initial, opts);
  EXPECT_EQ(rounds, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(target_rounds, rounds);
}

TEST(RunFederated, IidFedAvgBeatsLoneClientsInMostSeeds) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto c = small_config(Strategy::fedavg);
    c.seed = seed;
    c.participation = 1.0;
    c.alpha = 1000.0;
    c.rounds = 40;
    c.local_epochs = 2;
    c.batch_size = 4;
    c.train_per_class = 15;
    c.pool_per_class = 100;
    c.separation = 2.5;
    const auto sc = build_scenario(c);
    const auto r = run_federated(c, sc.shards, &sc.pool, sc.initial);
    double best_alone = 0.0;
    for (const auto& shard : sc.shards) {
      // Same number of SGD steps a client takes over the whole run.
      auto alone = sc.initial;
      Rng rng = make_stream(seed, "alone", {shard.client_id});
      const std::size_t steps = c.rounds * c.local_epochs * ((shard.size() + c.batch_size - 1) / c.batch_size);
      sgd_steps(alone, shard.dataset, steps, c.local_lr, c.momentum, c.batch_size, rng);
      best_alone = std::max(best_alone, diag::pool_accuracy(alone, sc.pool));
    }
    wins += diag::pool_accuracy(r.final_model, sc.pool) >= best_alone;
  }
  EXPECT_GE(wins, 3);
}

TEST(Scenario, DeterministicAndShaped) {
  const auto c = small_config(Strategy::mrtf);
  const auto a = build_scenario(c);
  const auto b = build_scenario(c);
  EXPECT_EQ(a.initial, b.initial);
  EXPECT_EQ(a.pool.features(), b.pool.features());
  ASSERT_EQ(a.shards.size(), c.clients);
  std::size_t total = 0;
  for (const auto& s : a.shards) total += s.size();
  EXPECT_EQ(total, c.num_classes * c.train_per_class);
  EXPECT_EQ(a.pool.size(), c.num_classes * c.pool_per_class);
  EXPECT_EQ(a.arch, (nn::MlpArch{c.input_dim, c.hidden_dims, c.num_classes}));

  auto shifted = c;
  shifted.domain_shift = true;
  const auto s = build_scenario(shifted);
  EXPECT_NE(s.pool.features(), a.pool.features());
  EXPECT_EQ(s.train.features, a.train.features);
}

TEST(Config, ValidationNamesTheKey) {
  auto expect_key = [](ExperimentConfig c, const char* key) {
    try {
      c.validate();
      ADD_FAILURE() << "accepted bad " << key;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.key(), key);
    }
  };
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.rounds = 0;
  expect_key(bad, "rounds");
  bad = c;
  bad.participation = 0.0;
  expect_key(bad, "participation");
  bad = c;
  bad.dp.sigma = 0.1;
  expect_key(bad, "dp_sigma");
  bad = c;
  bad.alpha = -1.0;
  expect_key(bad, "alpha");
  bad = c;
  bad.hidden_dims.clear();
  expect_key(bad, "hidden_dims");
  EXPECT_EQ(c.selected_per_round(), 5u);
}
