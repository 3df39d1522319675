#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../oracles/reference_mlp.hpp"
#include "mrtf/core/error.hpp"
#include "mrtf/nn/mlp.hpp"
#include "mrtf/nn/optim.hpp"

using namespace mrtf;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, scale);
  Matrix m(r, c);
  for (auto& v : m.values()) v = nd(rng);
  return m;
}

oracle::Net to_oracle(const nn::ParamVector& p) {
  oracle::Net net;
  net.widths.push_back(p.arch().input_dim);
  for (auto h : p.arch().hidden_dims) net.widths.push_back(h);
  net.widths.push_back(p.arch().num_classes);
  net.params.assign(p.values().begin(), p.values().end());
  return net;
}

std::vector<oracle::Vec> rows_of(const Matrix& m) {
  std::vector<oracle::Vec> out;
  for (std::size_t i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).begin(), m.row(i).end());
  return out;
}

// Biases are perturbed away from zero so every unit is active on some inputs.
nn::ParamVector test_params(const nn::MlpArch& arch, std::uint64_t seed) {
  auto p = nn::init_params(arch, seed);
  std::mt19937_64 rng(seed + 1);
  std::normal_distribution<double> nd(0.0, 0.1);
  for (auto& v : p.values()) v += nd(rng);
  return p;
}

}  // namespace

TEST(MlpArch, LayoutAndCount) {
  nn::MlpArch arch{3, {4, 5}, 2};
  EXPECT_EQ(arch.param_count(), 3u * 4 + 4 + 4 * 5 + 5 + 5 * 2 + 2);
  const auto l1 = arch.layer(1);
  EXPECT_EQ(l1.in, 4u);
  EXPECT_EQ(l1.out, 5u);
  EXPECT_EQ(l1.weight_offset, 16u);
  EXPECT_EQ(l1.bias_offset, 36u);
  EXPECT_THROW((nn::MlpArch{3, {0}, 2}.validate()), ValueError);
  EXPECT_THROW((nn::MlpArch{3, {4}, 1}.validate()), ValueError);
}

TEST(ParamVector, RejectsWrongLengthAndNonFinite) {
  nn::MlpArch arch{2, {2}, 2};
  EXPECT_THROW(nn::ParamVector(arch, std::vector<double>(3)), DimensionError);
  std::vector<double> v(arch.param_count(), 0.0);
  v[1] = std::nan("");
  EXPECT_THROW(nn::ParamVector(arch, v), ValueError);
}

TEST(InitParams, DeterministicGlorotWithZeroBias) {
  nn::MlpArch arch{8, {6}, 3};
  const auto a = nn::init_params(arch, 4);
  EXPECT_EQ(a, nn::init_params(arch, 4));
  EXPECT_NE(a, nn::init_params(arch, 5));
  const double limit = std::sqrt(6.0 / (8 + 6));
  const auto l0 = arch.layer(0);
  for (std::size_t i = 0; i < l0.in * l0.out; ++i) EXPECT_LE(std::abs(a.values()[i]), limit);
  for (std::size_t i = 0; i < l0.out; ++i) EXPECT_EQ(a.values()[l0.bias_offset + i], 0.0);
}

TEST(Forward, MatchesReferenceOracle) {
  nn::MlpArch arch{7, {11, 6}, 4};
  const auto p = test_params(arch, 21);
  const auto x = random_matrix(9, 7, 22);
  const auto logits = nn::forward_logits(p, x);
  const auto net = to_oracle(p);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto ref = oracle::forward(net, {x.row(i).begin(), x.row(i).end()});
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(logits(i, c), static_cast<double>(ref[c]), 1e-12);
  }
}

TEST(Forward, DimensionMismatchThrows) {
  nn::MlpArch arch{3, {4}, 2};
  EXPECT_THROW(nn::forward_logits(nn::init_params(arch, 0), Matrix(2, 4)), DimensionError);
}

TEST(Features, LastHiddenLayerIsNonNegative) {
  nn::MlpArch arch{5, {8, 6}, 3};
  const auto h = nn::extract_features(test_params(arch, 1), random_matrix(10, 5, 2));
  EXPECT_EQ(h.cols(), 6u);
  for (double v : h.values()) EXPECT_GE(v, 0.0);
}

TEST(Softmax, RowsAreDistributionsAndShiftInvariant) {
  const auto z = random_matrix(5, 7, 3, 4.0);
  Matrix shifted = z;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    for (auto& v : shifted.row(i)) v += 1000.0 * static_cast<double>(i + 1);
  }
  const auto p = nn::softmax(z);
  const auto q = nn::softmax(shifted);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double s = 0.0;
    for (double v : p.row(i)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  for (std::size_t i = 0; i < p.values().size(); ++i) EXPECT_NEAR(p.values()[i], q.values()[i], 1e-12);
}

TEST(Softmax, ExtremeLogitsStayFinite) {
  const auto p = nn::softmax(Matrix{{1e300, -1e300, 0.0}});
  EXPECT_EQ(p(0, 0), 1.0);
  EXPECT_EQ(p(0, 1), 0.0);
  EXPECT_THROW(nn::softmax(Matrix{{std::nan(""), 0.0}}), ValueError);
}

TEST(Softmax, InverseTemperatureSharpens) {
  const Matrix z{{1.0, 0.0}};
  EXPECT_GT(nn::softmax(z, 4.0)(0, 0), nn::softmax(z)(0, 0));
}

TEST(CrossEntropy, RejectsBadInputs) {
  nn::MlpArch arch{2, {3}, 2};
  const auto p = nn::init_params(arch, 0);
  const std::vector<int> bad{2};
  EXPECT_THROW(nn::cross_entropy_loss_grad(p, Matrix(1, 2), bad), ValueError);
  EXPECT_THROW(nn::cross_entropy_loss_grad(p, Matrix(0, 2), std::vector<int>{}), ValueError);
}

// Central differences of the long-double oracle loss against analytic gradients,
// on a two-hidden-layer net, over 24 random coordinates per loss.
class GradientOracle : public ::testing::Test {
 protected:
  nn::MlpArch arch{6, {9, 7}, 4};
  nn::ParamVector params = test_params(arch, 31);
  Matrix x = random_matrix(12, 6, 32);
  std::vector<int> labels{0, 1, 2, 3, 0, 1, 2, 3, 1, 1, 0, 2};

  template <typename Loss>
  void check(const std::vector<double>& analytic, Loss loss) {
    auto net = to_oracle(params);
    std::mt19937_64 rng(33);
    std::uniform_int_distribution<std::size_t> pick(0, params.size() - 1);
    const oracle::Real h = 1e-6L;
    int checked = 0;
    for (int k = 0; k < 24; ++k) {
      const std::size_t i = pick(rng);
      const oracle::Real saved = net.params[i];
      net.params[i] = saved + h;
      const oracle::Real up = loss(net);
      net.params[i] = saved - h;
      const oracle::Real down = loss(net);
      net.params[i] = saved;
      const double numeric = static_cast<double>((up - down) / (2 * h));
      const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
      EXPECT_LE(std::abs(numeric - analytic[i]) / denom, 1e-4) << "coordinate " << i;
      ++checked;
    }
    EXPECT_GE(checked, 20);
  }
};

TEST_F(GradientOracle, CrossEntropy) {
  const auto lg = nn::cross_entropy_loss_grad(params, x, labels);
  const auto xs = rows_of(x);
  EXPECT_NEAR(lg.loss, static_cast<double>(oracle::cross_entropy(to_oracle(params), xs, labels)), 1e-12);
  check({lg.grad.values().begin(), lg.grad.values().end()},
        [&](const oracle::Net& n) { return oracle::cross_entropy(n, xs, labels); });
}

TEST_F(GradientOracle, KlDistillation) {
  const auto targets = nn::softmax(random_matrix(12, 4, 34, 2.0));
  const auto lg = nn::kl_distill_loss_grad(params, x, targets);
  const auto xs = rows_of(x);
  const auto ts = rows_of(targets);
  EXPECT_NEAR(lg.loss, static_cast<double>(oracle::kl(to_oracle(params), xs, ts)), 1e-12);
  check({lg.grad.values().begin(), lg.grad.values().end()},
        [&](const oracle::Net& n) { return oracle::kl(n, xs, ts); });
}

TEST(KlDistill, SelfTargetsAreAFixedPoint) {
  nn::MlpArch arch{4, {5, 5}, 3};
  const auto p = test_params(arch, 41);
  const auto x = random_matrix(20, 4, 42);
  const auto lg = nn::kl_distill_loss_grad(p, x, nn::softmax(nn::forward_logits(p, x)));
  EXPECT_LE(std::abs(lg.loss), 1e-9);
  for (double g : lg.grad.values()) EXPECT_LE(std::abs(g), 1e-9);
}

TEST(KlDistill, RejectsNonStochasticTargets) {
  nn::MlpArch arch{2, {2}, 2};
  EXPECT_THROW(nn::kl_distill_loss_grad(nn::init_params(arch, 0), Matrix(1, 2), Matrix{{0.5, 0.6}}), ValueError);
}

// The KL gradient against a weighted average of teachers equals the same weighted
// sum of per-teacher KL gradients: the loss differs only by a theta-free entropy term.
TEST(KlDistill, AveragedTargetsDecomposeIntoPerTeacherTerms) {
  nn::MlpArch arch{4, {6, 5}, 3};
  const auto p = test_params(arch, 51);
  const auto x = random_matrix(15, 4, 52);
  const std::vector<double> w{0.5, 0.3, 0.2};
  std::vector<Matrix> teachers;
  Matrix mixed(15, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    teachers.push_back(nn::softmax(random_matrix(15, 3, 53 + k, 3.0)));
    for (std::size_t i = 0; i < mixed.values().size(); ++i) mixed.values()[i] += w[k] * teachers[k].values()[i];
  }
  const auto whole = nn::kl_distill_loss_grad(p, x, mixed).grad;
  std::vector<double> sum(p.size(), 0.0);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto g = nn::kl_distill_loss_grad(p, x, teachers[k]).grad;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += w[k] * g.values()[i];
  }
  for (std::size_t i = 0; i < sum.size(); ++i) EXPECT_NEAR(whole.values()[i], sum[i], 1e-9);
}

TEST(Optim, SgdMomentumHandCase) {
  nn::MlpArch arch{2, {1}, 2};
  nn::ParamVector p(arch);
  auto state = nn::OptimizerState::sgd_momentum(p.size());
  std::vector<double> g(p.size(), 1.0);
  nn::sgd_momentum_step(p, g, state, 0.1, 0.9);
  EXPECT_DOUBLE_EQ(p.values()[0], -0.1);
  nn::sgd_momentum_step(p, g, state, 0.1, 0.9);
  EXPECT_DOUBLE_EQ(p.values()[0], -0.1 - 0.1 * 1.9);
}

TEST(Optim, AdamFirstStepIsLearningRateTimesSign) {
  nn::MlpArch arch{2, {1}, 2};
  nn::ParamVector p(arch);
  auto state = nn::OptimizerState::adam(p.size());
  std::vector<double> g(p.size(), 0.0);
  g[0] = 3.0;
  g[1] = -0.02;
  nn::adam_step(p, g, state, 0.001);
  EXPECT_NEAR(p.values()[0], -0.001, 1e-10);
  EXPECT_NEAR(p.values()[1], 0.001, 1e-8);
  EXPECT_EQ(p.values()[2], 0.0);
  EXPECT_EQ(state.step, 1u);
}

TEST(Optim, NonFiniteGradientThrows) {
  nn::MlpArch arch{2, {1}, 2};
  nn::ParamVector p(arch);
  auto state = nn::OptimizerState::adam(p.size());
  std::vector<double> g(p.size(), 0.0);
  g[0] = INFINITY;
  EXPECT_THROW(nn::adam_step(p, g, state, 0.001), ValueError);
  EXPECT_THROW(nn::adam_step(p, std::vector<double>(2), state, 0.001), DimensionError);
}
