#include "mrtf/nn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "mrtf/core/error.hpp"
#include "mrtf/core/rng.hpp"
#include "mrtf/simd/kernels.hpp"

namespace mrtf::nn {

namespace {

constexpr double kTargetTolerance = 1e-6;

std::size_t layer_input(const MlpArch& arch, std::size_t l) {
  return l == 0 ? arch.input_dim : arch.hidden_dims[l - 1];
}

std::size_t layer_output(const MlpArch& arch, std::size_t l) {
  return l < arch.hidden_dims.size() ? arch.hidden_dims[l] : arch.num_classes;
}

void check_inputs(const ParamVector& params, const Matrix& inputs) {
  if (inputs.cols() != params.arch().input_dim) {
    throw DimensionError("input feature count", params.arch().input_dim, inputs.cols());
  }
}

void relu_inplace(std::span<double> v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

// Runs layers [0, stop) and returns every activation (index 0 is the input).
std::vector<Matrix> forward_trace(const ParamVector& params, const Matrix& inputs, std::size_t stop) {
  const auto& arch = params.arch();
  const auto& k = simd::kernels();
  const double* theta = params.values().data();
  std::vector<Matrix> acts;
  acts.reserve(stop + 1);
  acts.push_back(inputs);
  for (std::size_t l = 0; l < stop; ++l) {
    const LayerView lv = arch.layer(l);
    const Matrix& prev = acts.back();
    Matrix next(prev.rows(), lv.out);
    for (std::size_t i = 0; i < prev.rows(); ++i) {
      k.affine(theta + lv.weight_offset, theta + lv.bias_offset, prev.row(i).data(), next.row(i).data(), lv.out,
               lv.in);
      if (l + 1 < arch.num_layers()) relu_inplace(next.row(i));
    }
    acts.push_back(std::move(next));
  }
  return acts;
}

}  // namespace

LayerView MlpArch::layer(std::size_t index) const {
  std::size_t offset = 0;
  for (std::size_t l = 0; l < index; ++l) {
    offset += layer_output(*this, l) * (layer_input(*this, l) + 1);
  }
  const std::size_t in = layer_input(*this, index);
  const std::size_t out = layer_output(*this, index);
  return {in, out, offset, offset + in * out};
}

std::size_t MlpArch::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < num_layers(); ++l) n += layer_output(*this, l) * (layer_input(*this, l) + 1);
  return n;
}

void MlpArch::validate() const {
  if (input_dim == 0) throw ValueError("MlpArch: input_dim must be >= 1");
  if (num_classes < 2) throw ValueError("MlpArch: num_classes must be >= 2");
  for (auto h : hidden_dims) {
    if (h == 0) throw ValueError("MlpArch: hidden dims must be >= 1");
  }
}

ParamVector::ParamVector(MlpArch arch) : arch_(std::move(arch)) {
  arch_.validate();
  values_.assign(arch_.param_count(), 0.0);
}

ParamVector::ParamVector(MlpArch arch, std::vector<double> values)
    : arch_(std::move(arch)), values_(std::move(values)) {
  arch_.validate();
  if (values_.size() != arch_.param_count()) {
    throw DimensionError("parameter vector length", arch_.param_count(), values_.size());
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValueError("parameter vector contains a non-finite entry");
  }
}

ParamVector init_params(const MlpArch& arch, std::uint64_t seed) {
  ParamVector params(arch);
  auto rng = make_stream(seed, "init");
  auto theta = params.values();
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    const LayerView lv = arch.layer(l);
    const double bound = std::sqrt(6.0 / static_cast<double>(lv.in + lv.out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < lv.in * lv.out; ++i) theta[lv.weight_offset + i] = dist(rng);
  }
  return params;
}

Matrix forward_logits(const ParamVector& params, const Matrix& inputs) {
  check_inputs(params, inputs);
  auto acts = forward_trace(params, inputs, params.arch().num_layers());
  return std::move(acts.back());
}

Matrix extract_features(const ParamVector& params, const Matrix& inputs) {
  if (params.arch().hidden_dims.empty()) throw ValueError("extract_features: architecture has no hidden layer");
  check_inputs(params, inputs);
  auto acts = forward_trace(params, inputs, params.arch().hidden_dims.size());
  return std::move(acts.back());
}

std::vector<double> log_sum_exp(const Matrix& logits) {
  std::vector<double> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    const double m = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double z : row) s += std::exp(z - m);
    out[i] = m + std::log(s);
  }
  return out;
}

Matrix softmax(const Matrix& logits, double inverse_temperature) {
  if (!(inverse_temperature > 0.0)) throw ValueError("softmax: temperature must be positive");
  require_finite(logits, "softmax logits");
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto z = logits.row(i);
    auto p = out.row(i);
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) {
      p[c] = std::exp(inverse_temperature * (z[c] - m));
      s += p[c];
    }
    for (double& v : p) v /= s;
  }
  return out;
}

ParamVector backprop(const ParamVector& params, const Matrix& inputs, const Matrix& dlogits) {
  check_inputs(params, inputs);
  const auto& arch = params.arch();
  if (dlogits.rows() != inputs.rows()) throw DimensionError("dlogits rows", inputs.rows(), dlogits.rows());
  if (dlogits.cols() != arch.num_classes) throw DimensionError("dlogits cols", arch.num_classes, dlogits.cols());

  const auto& k = simd::kernels();
  auto acts = forward_trace(params, inputs, arch.num_layers() - 1);
  ParamVector grad(arch);
  const double* theta = params.values().data();
  double* g = grad.values().data();

  Matrix delta = dlogits;
  for (std::size_t l = arch.num_layers(); l-- > 0;) {
    const LayerView lv = arch.layer(l);
    const Matrix& a_in = acts[l];
    Matrix delta_in = l > 0 ? Matrix(inputs.rows(), lv.in) : Matrix();
    for (std::size_t i = 0; i < inputs.rows(); ++i) {
      const double* d = delta.row(i).data();
      k.outer_accum(d, a_in.row(i).data(), g + lv.weight_offset, lv.out, lv.in);
      k.axpy(1.0, d, g + lv.bias_offset, lv.out);
      if (l > 0) {
        double* din = delta_in.row(i).data();
        k.affine_transpose_accum(theta + lv.weight_offset, d, din, lv.out, lv.in);
        auto act = a_in.row(i);
        for (std::size_t j = 0; j < lv.in; ++j) {
          if (!(act[j] > 0.0)) din[j] = 0.0;
        }
      }
    }
    if (l > 0) delta = std::move(delta_in);
  }
  return grad;
}

LossGrad cross_entropy_loss_grad(const ParamVector& params, const Matrix& inputs, std::span<const int> labels) {
  if (inputs.rows() == 0) throw ValueError("cross_entropy_loss_grad: empty batch");
  if (labels.size() != inputs.rows()) throw DimensionError("label count", inputs.rows(), labels.size());
  const std::size_t classes = params.arch().num_classes;
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw ValueError("cross_entropy_loss_grad: label " + std::to_string(y) + " outside [0, C)");
    }
  }
  Matrix logits = forward_logits(params, inputs);
  require_finite(logits, "cross_entropy_loss_grad logits");
  const auto lse = log_sum_exp(logits);
  const double inv_n = 1.0 / static_cast<double>(inputs.rows());

  double loss = 0.0;
  Matrix dlogits(inputs.rows(), classes);
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    auto z = logits.row(i);
    auto d = dlogits.row(i);
    const auto y = static_cast<std::size_t>(labels[i]);
    loss += lse[i] - z[y];
    for (std::size_t c = 0; c < classes; ++c) d[c] = std::exp(z[c] - lse[i]) * inv_n;
    d[y] -= inv_n;
  }
  return {loss * inv_n, backprop(params, inputs, dlogits)};
}

LossGrad kl_distill_loss_grad(const ParamVector& params, const Matrix& inputs, const Matrix& targets) {
  if (inputs.rows() == 0) throw ValueError("kl_distill_loss_grad: empty batch");
  if (targets.rows() != inputs.rows()) throw DimensionError("target rows", inputs.rows(), targets.rows());
  const std::size_t classes = params.arch().num_classes;
  if (targets.cols() != classes) throw DimensionError("target cols", classes, targets.cols());
  require_row_stochastic(targets, kTargetTolerance, "kl_distill_loss_grad targets");

  Matrix logits = forward_logits(params, inputs);
  require_finite(logits, "kl_distill_loss_grad logits");
  const auto lse = log_sum_exp(logits);
  const double inv_n = 1.0 / static_cast<double>(inputs.rows());

  double loss = 0.0;
  Matrix dlogits(inputs.rows(), classes);
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    auto z = logits.row(i);
    auto t = targets.row(i);
    auto d = dlogits.row(i);
    double t_sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double log_p = z[c] - lse[i];
      if (t[c] > 0.0) loss += t[c] * (std::log(t[c]) - log_p);
      t_sum += t[c];
    }
    // d/dz of sum_c t_c (log t_c - log p_c) = p * sum(t) - t
    for (std::size_t c = 0; c < classes; ++c) d[c] = (std::exp(z[c] - lse[i]) * t_sum - t[c]) * inv_n;
  }
  return {loss * inv_n, backprop(params, inputs, dlogits)};
}

}  // namespace mrtf::nn
