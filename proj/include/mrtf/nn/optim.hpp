#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mrtf/nn/mlp.hpp"

namespace mrtf::nn {

enum class OptimizerKind { sgd_momentum, adam };

/// Slot buffers for one optimizer run. SGD uses `first` as the velocity buffer;
/// Adam uses `first`/`second` as the moment estimates and counts steps.
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::sgd_momentum;
  std::vector<double> first;
  std::vector<double> second;
  std::uint64_t step = 0;

  static OptimizerState sgd_momentum(std::size_t n);
  static OptimizerState adam(std::size_t n);
};

struct AdamConstants {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// v <- momentum * v + grad; params <- params - lr * v.
void sgd_momentum_step(ParamVector& params, std::span<const double> grad, OptimizerState& state, double lr,
                       double momentum);

/// Bias-corrected Adam.
void adam_step(ParamVector& params, std::span<const double> grad, OptimizerState& state, double lr,
               const AdamConstants& constants = {});

}  // namespace mrtf::nn
