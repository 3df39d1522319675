#include "mrtf/nn/optim.hpp"

#include <cmath>

#include "mrtf/core/error.hpp"
#include "mrtf/simd/kernels.hpp"

namespace mrtf::nn {

namespace {

void check_step(const ParamVector& params, std::span<const double> grad, const OptimizerState& state,
                OptimizerKind expected, double lr) {
  if (state.kind != expected) throw ValueError("optimizer state kind does not match the update rule");
  if (grad.size() != params.size()) throw DimensionError("gradient length", params.size(), grad.size());
  if (state.first.size() != params.size()) {
    throw DimensionError("optimizer buffer length", params.size(), state.first.size());
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ValueError("learning rate must be a finite non-negative number");
  for (double g : grad) {
    if (!std::isfinite(g)) throw ValueError("optimizer step: non-finite gradient");
  }
}

}  // namespace

OptimizerState OptimizerState::sgd_momentum(std::size_t n) {
  return {OptimizerKind::sgd_momentum, std::vector<double>(n, 0.0), {}, 0};
}

OptimizerState OptimizerState::adam(std::size_t n) {
  return {OptimizerKind::adam, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0};
}

void sgd_momentum_step(ParamVector& params, std::span<const double> grad, OptimizerState& state, double lr,
                       double momentum) {
  check_step(params, grad, state, OptimizerKind::sgd_momentum, lr);
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ValueError("momentum must lie in [0, 1)");
  simd::scale(momentum, state.first);
  simd::axpy(1.0, grad, state.first);
  simd::axpy(-lr, state.first, params.values());
  ++state.step;
}

void adam_step(ParamVector& params, std::span<const double> grad, OptimizerState& state, double lr,
               const AdamConstants& constants) {
  check_step(params, grad, state, OptimizerKind::adam, lr);
  if (state.second.size() != params.size()) {
    throw DimensionError("optimizer buffer length", params.size(), state.second.size());
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(constants.beta1, t);
  const double correction2 = 1.0 - std::pow(constants.beta2, t);
  auto theta = params.values();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    state.first[i] = constants.beta1 * state.first[i] + (1.0 - constants.beta1) * g;
    state.second[i] = constants.beta2 * state.second[i] + (1.0 - constants.beta2) * g * g;
    const double m_hat = state.first[i] / correction1;
    const double v_hat = state.second[i] / correction2;
    theta[i] -= lr * m_hat / (std::sqrt(v_hat) + constants.epsilon);
  }
}

}  // namespace mrtf::nn
