#include "mrtf/refinery/teachers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrtf/core/error.hpp"
#include "mrtf/nn/mlp.hpp"

namespace mrtf::refinery {

namespace {

constexpr double kWeightTolerance = 1e-9;
constexpr double kTargetTolerance = 1e-6;

void check_weights(std::span<const double> weights, std::size_t count) {
  if (count == 0) throw ValueError("teacher ensemble is empty");
  if (weights.size() != count) throw DimensionError("teacher weight count", count, weights.size());
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValueError("teacher weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightTolerance) throw ValueError("teacher weights sum to " + std::to_string(sum));
}

void check_same_shape(std::span<const Matrix> mats) {
  for (const auto& m : mats) {
    if (m.rows() != mats[0].rows()) throw DimensionError("teacher sample count", mats[0].rows(), m.rows());
    if (m.cols() != mats[0].cols()) throw DimensionError("teacher class count", mats[0].cols(), m.cols());
  }
}

}  // namespace

std::string_view source_name(TargetSource source) {
  switch (source) {
    case TargetSource::avg_logi:
      return "avg_logi";
    case TargetSource::avg_prob:
      return "avg_prob";
    case TargetSource::rectified:
      return "rectified";
    case TargetSource::refined:
      return "refined";
  }
  return "unknown";
}

void check_targets(const Matrix& probs, const char* what) { require_row_stochastic(probs, kTargetTolerance, what); }

double pooled_std(const Matrix& logits) {
  const auto v = logits.values();
  if (v.empty()) throw ValueError("pooled_std: empty logits");
  long double mean = 0.0L;
  for (double x : v) mean += x;
  mean /= static_cast<long double>(v.size());
  long double ss = 0.0L;
  for (double x : v) {
    const long double d = x - mean;
    ss += d * d;
  }
  return static_cast<double>(std::sqrt(ss / static_cast<long double>(v.size())));
}

Matrix standardize_logits(const Matrix& logits, double tau) {
  if (!(tau > 0.0)) throw ValueError("temperature must be positive");
  require_finite(logits, "teacher logits");
  const double s = pooled_std(logits);
  Matrix z(logits.rows(), logits.cols());
  if (s < kMinLogitStd) return z;
  const double factor = static_cast<double>(static_cast<long double>(tau) / s);
  auto out = z.values();
  auto in = logits.values();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * factor;
  return z;
}

NormalizedTeacher normalize_logits(const Matrix& logits, double tau) {
  Matrix z = standardize_logits(logits, tau);
  if (pooled_std(logits) < kMinLogitStd) {
    return {Matrix(logits.rows(), logits.cols(), 1.0 / static_cast<double>(logits.cols())), true};
  }
  for (double& v : z.values()) v = std::nearbyint(v / kStandardizedGrid) * kStandardizedGrid;
  return {nn::softmax(z), false};
}

TeacherTargets avg_logi(std::span<const Matrix> logits, std::span<const double> weights) {
  check_weights(weights, logits.size());
  check_same_shape(logits);
  Matrix mixed(logits[0].rows(), logits[0].cols());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    auto src = logits[k].values();
    auto dst = mixed.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += weights[k] * src[i];
  }
  return {nn::softmax(mixed), TargetSource::avg_logi};
}

TeacherTargets avg_prob(std::span<const Matrix> probs, std::span<const double> weights) {
  check_weights(weights, probs.size());
  check_same_shape(probs);
  Matrix mixed(probs[0].rows(), probs[0].cols());
  for (std::size_t k = 0; k < probs.size(); ++k) {
    check_targets(probs[k], "avg_prob teacher");
    auto src = probs[k].values();
    auto dst = mixed.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += weights[k] * src[i];
  }
  return {std::move(mixed), TargetSource::avg_prob};
}

std::vector<double> row_entropy(const Matrix& probs) {
  std::vector<double> out(probs.rows(), 0.0);
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    double h = 0.0;
    for (double p : probs.row(i)) {
      if (p > 0.0) h -= p * std::log(p);
    }
    out[i] = h;
  }
  return out;
}

Matrix entropy_weights(std::span<const Matrix> probs) {
  if (probs.empty()) throw ValueError("entropy_weights: need at least one client");
  check_same_shape(probs);
  const std::size_t clients = probs.size();
  const std::size_t samples = probs[0].rows();
  Matrix neg_entropy(samples, clients);
  for (std::size_t k = 0; k < clients; ++k) {
    const auto h = row_entropy(probs[k]);
    for (std::size_t j = 0; j < samples; ++j) neg_entropy(j, k) = -h[j];
  }
  const Matrix per_sample = nn::softmax(neg_entropy);
  Matrix weights(clients, samples);
  for (std::size_t j = 0; j < samples; ++j) {
    for (std::size_t k = 0; k < clients; ++k) weights(k, j) = per_sample(j, k);
  }
  return weights;
}

double compute_ut(std::span<const double> local_losses, std::size_t num_classes) {
  if (local_losses.empty()) throw ValueError("compute_ut: no local losses");
  if (num_classes < 2) throw ValueError("compute_ut: need at least 2 classes");
  const double log_c = std::log(static_cast<double>(num_classes));
  double sum = 0.0;
  for (double loss : local_losses) {
    if (!(loss >= 0.0)) throw ValueError("compute_ut: local losses must be non-negative");
    sum += std::min(loss, log_c);
  }
  const double mean = sum / static_cast<double>(local_losses.size());
  return 0.25 + 0.75 * mean / log_c;
}

TeacherTargets rectified_targets(const TeacherSet& teachers, double u_t) {
  if (!(u_t >= 0.0 && u_t <= 1.0)) throw ValueError("rectified_targets: u_t must lie in [0, 1]");
  if (teachers.local_probs.empty()) throw ValueError("rectified_targets: no local teachers");
  check_same_shape(teachers.local_probs);
  const Matrix& first = teachers.local_probs[0];
  for (const Matrix* g : {&teachers.global_before, &teachers.global_after}) {
    if (g->rows() != first.rows()) throw DimensionError("global teacher sample count", first.rows(), g->rows());
    if (g->cols() != first.cols()) throw DimensionError("global teacher class count", first.cols(), g->cols());
  }

  const Matrix weights = entropy_weights(teachers.local_probs);
  const double global_share = 0.5 * (1.0 - u_t);
  Matrix out(first.rows(), first.cols());
  for (std::size_t j = 0; j < out.rows(); ++j) {
    auto dst = out.row(j);
    for (std::size_t k = 0; k < teachers.local_probs.size(); ++k) {
      const double w = u_t * weights(k, j);
      auto src = teachers.local_probs[k].row(j);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
    }
    auto before = teachers.global_before.row(j);
    auto after = teachers.global_after.row(j);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += global_share * (before[c] + after[c]);
  }
  return {std::move(out), TargetSource::rectified};
}

}  // namespace mrtf::refinery
