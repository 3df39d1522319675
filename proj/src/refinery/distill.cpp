#include "mrtf/refinery/distill.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mrtf/core/error.hpp"
#include "mrtf/core/rng.hpp"
#include "mrtf/nn/optim.hpp"
#include "mrtf/simd/kernels.hpp"

namespace mrtf::refinery {

nn::ParamVector refine_model(const nn::ParamVector& start, const Matrix& pool_inputs, const TeacherTargets& targets,
                             const DistillSettings& settings) {
  if (targets.probs.rows() != pool_inputs.rows()) {
    throw DimensionError("distillation target rows", pool_inputs.rows(), targets.probs.rows());
  }
  nn::ParamVector model = start;
  if (settings.steps == 0) return model;
  if (pool_inputs.rows() == 0) throw ValueError("refine_model: empty pool");
  check_targets(targets.probs, "distillation targets");

  auto rng = make_stream(settings.seed, "distill-batches");
  std::vector<std::size_t> order(pool_inputs.rows());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::clamp<std::size_t>(settings.batch_size, 1, order.size());
  std::size_t cursor = order.size();

  auto state = nn::OptimizerState::adam(model.size());
  std::vector<std::size_t> picked(batch);
  for (std::size_t step = 0; step < settings.steps; ++step) {
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      picked[b] = order[cursor++];
    }
    const Matrix x = gather_rows(pool_inputs, picked);
    const Matrix t = gather_rows(targets.probs, picked);
    auto [loss, grad] = nn::kl_distill_loss_grad(model, x, t);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "distillation loss became non-finite at step " << step << " (|theta|^2 = "
          << simd::squared_norm(model.values()) << ")";
      throw ValueError(msg.str());
    }
    nn::adam_step(model, grad.values(), state, settings.lr);
  }
  return model;
}

DistillSettings distill_settings_for(const fed::ExperimentConfig& config, std::size_t round) {
  return {config.distill_steps, config.distill_lr, config.distill_batch_size,
          derive_seed(config.seed, "distill", {round})};
}

}  // namespace mrtf::refinery
