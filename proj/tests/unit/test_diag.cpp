#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "mrtf/core/error.hpp"
#include "mrtf/data/blobs.hpp"
#include "mrtf/diag/ensemble_demo.hpp"
#include "mrtf/diag/metrics.hpp"
#include "mrtf/diag/probe.hpp"
#include "mrtf/fed/engine.hpp"
#include "mrtf/fed/scenario.hpp"
#include "mrtf/refinery/teachers.hpp"

using namespace mrtf;
using namespace mrtf::diag;

namespace {

nn::ParamVector filled(const nn::MlpArch& arch, double v) {
  nn::ParamVector p(arch);
  std::fill(p.values().begin(), p.values().end(), v);
  return p;
}

}  // namespace

TEST(Argmax, TiesGoToLowestIndex) {
  EXPECT_EQ(argmax(std::vector<double>{0.2, 0.5, 0.5}), 1u);
  EXPECT_EQ(argmax(std::vector<double>{1, 1, 1}), 0u);
  EXPECT_EQ(argmax(std::vector<double>{-3, -1, -2}), 1u);
}

TEST(Accuracy, Examples) {
  const Matrix scores{{0.1, 0.9}, {0.8, 0.2}, {0.3, 0.7}};
  EXPECT_DOUBLE_EQ(argmax_accuracy(scores, std::vector<int>{1, 0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(argmax_accuracy(scores, std::vector<int>{0, 1, 0}), 0.0);
  EXPECT_THROW(argmax_accuracy(Matrix(0, 2), std::vector<int>{}), ValueError);

  // A zero model outputs constant logits: the tie rule predicts class 0 everywhere,
  // so accuracy is exactly the share of class 0.
  const auto d = data::generate_blobs({10, 3, 7, 2.0, 0});
  const nn::ParamVector zero(nn::MlpArch{3, {4}, 10});
  EXPECT_DOUBLE_EQ(accuracy(zero, d.features, d.labels), 0.1);
}

TEST(Accuracy, PoolPathsAgree) {
  const auto d = data::generate_blobs({4, 5, 30, 3.0, 1});
  const auto pool = data::UnlabeledPool::from_labeled(d);
  const auto p = nn::init_params({5, {8}, 4}, 3);
  EXPECT_EQ(pool_accuracy(p, pool), accuracy(p, d.features, d.labels));
  const auto q = nn::softmax(nn::forward_logits(p, pool.features()));
  EXPECT_EQ(targets_accuracy(q, pool), pool_accuracy(p, pool));
  EXPECT_EQ(EvalAccess::labels(pool).size(), d.size());
}

TEST(GradientVariance, Examples) {
  const nn::MlpArch arch{2, {2}, 2};
  const auto agg = nn::init_params(arch, 1);
  const std::vector<nn::ParamVector> same{agg, agg, agg};
  EXPECT_EQ(gradient_variance(same, agg), 0.0);

  const auto v = nn::init_params(arch, 2);
  auto plus = agg, minus = agg;
  double vv = 0.0;
  for (std::size_t i = 0; i < agg.size(); ++i) {
    plus.values()[i] += v.values()[i];
    minus.values()[i] -= v.values()[i];
    vv += v.values()[i] * v.values()[i];
  }
  const std::vector<nn::ParamVector> pm{plus, minus};
  EXPECT_NEAR(gradient_variance(pm, agg), vv, 1e-12);
}

TEST(GradientVariance, PermutationInvariant) {
  const nn::MlpArch arch{3, {5}, 3};
  std::vector<nn::ParamVector> locals;
  for (std::uint64_t k = 0; k < 7; ++k) locals.push_back(nn::init_params(arch, k));
  const auto agg = nn::init_params(arch, 99);
  const double base = gradient_variance(locals, agg);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10; ++t) {
    std::shuffle(locals.begin(), locals.end(), rng);
    EXPECT_EQ(gradient_variance(locals, agg), base);
  }
}

TEST(WeightDivergence, Examples) {
  const nn::MlpArch arch{2, {3}, 2};
  const auto cen = nn::init_params(arch, 4);
  EXPECT_EQ(weight_divergence(cen, cen), 0.0);
  auto twice = cen;
  for (double& x : twice.values()) x *= 2.0;
  EXPECT_NEAR(weight_divergence(twice, cen), 1.0, 1e-15);
  EXPECT_THROW(weight_divergence(cen, filled(arch, 0.0)), ValueError);
}

TEST(WeightDivergence, ParameterPermutationInvariant) {
  const nn::MlpArch arch{3, {4}, 2};
  const auto a = nn::init_params(arch, 5), c = nn::init_params(arch, 6);
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(2);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> pa(a.size()), pc(a.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    pa[i] = a.values()[perm[i]];
    pc[i] = c.values()[perm[i]];
  }
  EXPECT_NEAR(weight_divergence(nn::ParamVector(arch, pa), nn::ParamVector(arch, pc)), weight_divergence(a, c),
              1e-13);
}

TEST(RoundMetrics, EnsembleAccuracyMatchesExplicitArgmax) {
  fed::ExperimentConfig c;
  c.strategy = fed::Strategy::mrtf;
  c.clients = 4;
  c.participation = 0.5;
  c.rounds = 2;
  c.local_epochs = 1;
  c.num_classes = 3;
  c.input_dim = 4;
  c.hidden_dims = {6};
  c.train_per_class = 20;
  c.pool_per_class = 15;
  c.distill_steps = 5;
  c.cluster_skip_rounds = 1;
  const auto sc = fed::build_scenario(c);
  std::vector<double> explicit_acc;
  fed::RunOptions opts;
  opts.on_targets = [&](std::size_t, const refinery::TeacherTargets& q) {
    std::size_t hits = 0;
    const auto labels = EvalAccess::labels(sc.pool);
    for (std::size_t i = 0; i < q.probs.rows(); ++i) {
      hits += static_cast<int>(argmax(q.probs.row(i))) == labels[i];
    }
    explicit_acc.push_back(static_cast<double>(hits) / static_cast<double>(q.probs.rows()));
  };
  const auto r = fed::run_federated(c, sc.shards, &sc.pool, sc.initial, opts);
  ASSERT_EQ(explicit_acc.size(), r.rounds.size());
  for (std::size_t t = 0; t < r.rounds.size(); ++t) {
    EXPECT_EQ(r.rounds[t].acc_ensemble, explicit_acc[t]);
    for (double a : {r.rounds[t].acc_aggregated, r.rounds[t].acc_refined, r.rounds[t].acc_ensemble}) {
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
    }
  }
}

namespace {

fed::ExperimentConfig probe_config() {
  fed::ExperimentConfig c;
  c.num_classes = 4;
  c.input_dim = 6;
  c.hidden_dims = {12};
  c.probe_train_per_class = 60;
  c.probe_test_per_class = 30;
  c.probe_pretrain_steps = {0, 40};
  c.probe_steps = 10;
  c.probe_clients = 4;
  return c;
}

}  // namespace

TEST(DivergenceProbe, ShapeDeterminismAndCsv) {
  const auto c = probe_config();
  const auto a = divergence_probe(c);
  const auto b = divergence_probe(c);
  ASSERT_EQ(a.rows.size(), 4u);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].gradient_variance, b.rows[i].gradient_variance);
    EXPECT_EQ(a.rows[i].acc_aggregated, b.rows[i].acc_aggregated);
    EXPECT_GE(a.rows[i].gradient_variance, 0.0);
    EXPECT_GE(a.rows[i].weight_divergence, 0.0);
  }
  EXPECT_EQ(a.rows[0].pretrain_steps, 0u);
  EXPECT_EQ(a.rows.back().pretrain_steps, 40u);

  std::ostringstream out;
  write_probe_csv(out, a);
  std::istringstream lines(out.str());
  std::string first, header;
  std::getline(lines, first);
  std::getline(lines, header);
  EXPECT_EQ(first, "# mrtf-probe v1");
  EXPECT_EQ(header,
            "pretrain_steps,split,alpha,gradient_variance,weight_divergence,acc_initial,acc_centralized,acc_aggregated");
  std::size_t rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  EXPECT_EQ(rows, 4u);
}

TEST(DivergenceProbe, NonIidDivergesMore) {
  const auto r = divergence_probe(probe_config());
  for (std::size_t i = 0; i + 1 < r.rows.size(); i += 2) {
    const auto& iid = r.rows[i].split == "iid" ? r.rows[i] : r.rows[i + 1];
    const auto& non = r.rows[i].split == "iid" ? r.rows[i + 1] : r.rows[i];
    EXPECT_EQ(non.split, "noniid");
    EXPECT_GT(non.gradient_variance, iid.gradient_variance);
    EXPECT_GT(non.weight_divergence, iid.weight_divergence);
  }
}

TEST(EnsembleDemo, ReportIsConsistent) {
  fed::ExperimentConfig c;
  diag::EnsembleDemoOptions o;
  o.train_per_class = 60;
  o.pool_per_class = 30;
  const auto r = ensemble_demo(c, o);
  ASSERT_EQ(r.acc_locals.size(), 3u);
  ASSERT_EQ(r.max_mean_logit.size(), 3u);
  for (double a : {r.acc_avg_logi, r.acc_avg_prob, r.acc_avg_prob_raw, r.acc_rectified, r.acc_global_before}) {
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
  EXPECT_GE(r.u_t, 0.25);
  EXPECT_LE(r.u_t, 1.0);
  for (double a : r.acc_locals) {
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
  EXPECT_LE(r.skew_shift_avg_prob, 2.0 * (0.6 - 1.0 / 3.0) + 1e-12);

  std::ostringstream out;
  write_demo_report(out, r);
  EXPECT_NE(out.str().find("avg_prob (stabilized)"), std::string::npos);
  EXPECT_EQ(ensemble_demo(c, o).acc_rectified, r.acc_rectified);
}
