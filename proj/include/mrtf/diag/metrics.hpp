#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mrtf/core/matrix.hpp"
#include "mrtf/data/dataset.hpp"
#include "mrtf/nn/mlp.hpp"

namespace mrtf::diag {

/// The only reader of a pool's held-out labels.
class EvalAccess {
 public:
  static std::span<const int> labels(const data::UnlabeledPool& pool) noexcept { return pool.eval_labels_; }
};

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> row);

/// Fraction of rows whose argmax equals the label. Throws ValueError on an empty set.
double argmax_accuracy(const Matrix& scores, std::span<const int> labels);

/// Classification accuracy of a model on labeled inputs.
double accuracy(const nn::ParamVector& params, const Matrix& inputs, std::span<const int> labels);

/// Accuracy of a model on the server pool, against its held-out labels.
double pool_accuracy(const nn::ParamVector& params, const data::UnlabeledPool& pool);

/// Accuracy of argmax(targets) on the server pool.
double targets_accuracy(const Matrix& targets, const data::UnlabeledPool& pool);

/// (1/K) sum_k ||theta_k - theta_agg||^2.
double gradient_variance(std::span<const nn::ParamVector> locals, const nn::ParamVector& aggregated);

/// ||theta_agg - theta_cen||^2 / ||theta_cen||^2. Throws ValueError when theta_cen is zero.
double weight_divergence(const nn::ParamVector& aggregated, const nn::ParamVector& centralized);

}  // namespace mrtf::diag
