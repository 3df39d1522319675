#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mrtf/core/matrix.hpp"

namespace mrtf::nn {

enum class Activation { relu };

/// Shape of one dense layer inside a flat parameter vector: W (out x in, row-major) then bias (out).
struct LayerView {
  std::size_t in;
  std::size_t out;
  std::size_t weight_offset;
  std::size_t bias_offset;
};

/// Fully connected ReLU classifier: input -> hidden... -> num_classes logits.
struct MlpArch {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t num_classes = 0;
  Activation activation = Activation::relu;

  std::size_t num_layers() const noexcept { return hidden_dims.size() + 1; }
  LayerView layer(std::size_t index) const;
  std::size_t param_count() const;
  /// Throws ValueError on zero dims or fewer than two classes.
  void validate() const;

  bool operator==(const MlpArch&) const = default;
};

/// Flattened model parameters plus the architecture they belong to.
class ParamVector {
 public:
  ParamVector() = default;
  /// All-zero parameters.
  explicit ParamVector(MlpArch arch);
  /// Validates length and finiteness.
  ParamVector(MlpArch arch, std::vector<double> values);

  const MlpArch& arch() const noexcept { return arch_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const ParamVector&) const = default;

 private:
  MlpArch arch_;
  std::vector<double> values_;
};

/// Glorot-uniform weights, zero biases.
ParamVector init_params(const MlpArch& arch, std::uint64_t seed);

Matrix forward_logits(const ParamVector& params, const Matrix& inputs);

/// Post-activation output of the last hidden layer (M x H).
Matrix extract_features(const ParamVector& params, const Matrix& inputs);

/// Row-wise softmax of `inverse_temperature * logits`, computed with max subtraction.
Matrix softmax(const Matrix& logits, double inverse_temperature = 1.0);

/// Row-wise log-sum-exp.
std::vector<double> log_sum_exp(const Matrix& logits);

struct LossGrad {
  double loss;
  ParamVector grad;
};

/// Mean negative log-likelihood over the batch and its gradient.
LossGrad cross_entropy_loss_grad(const ParamVector& params, const Matrix& inputs, std::span<const int> labels);

/// Mean KL(target || softmax(f(x))) over the batch and its gradient.
LossGrad kl_distill_loss_grad(const ParamVector& params, const Matrix& inputs, const Matrix& targets);

/// Backpropagates d(loss)/d(logits) through the network. `dlogits` is n x C.
ParamVector backprop(const ParamVector& params, const Matrix& inputs, const Matrix& dlogits);

}  // namespace mrtf::nn
