#include <string>

#include "mrtf/core/error.hpp"
#include "mrtf/nn/mlp.hpp"
#include "mrtf/refinery/cluster.hpp"
#include "mrtf/refinery/distill.hpp"

namespace mrtf::refinery {

namespace {

void check_state(const fed::RoundState& state) {
  if (state.local_models.empty()) throw ValueError("round refinement needs at least one local model");
  if (state.local_losses.size() != state.local_models.size()) {
    throw DimensionError("local loss count", state.local_models.size(), state.local_losses.size());
  }
}

std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

Matrix stabilized(const nn::ParamVector& model, const Matrix& pool_inputs, double tau, const std::string& who,
                  std::vector<std::string>& warnings) {
  auto teacher = normalize_logits(nn::forward_logits(model, pool_inputs), tau);
  if (teacher.degenerate) warnings.push_back(who + " produced constant logits; using uniform predictions");
  return std::move(teacher.probs);
}

}  // namespace

RefineOutcome mrtf_round_refine(const fed::RoundState& state, const Matrix& pool_inputs,
                                const fed::ExperimentConfig& config) {
  check_state(state);
  RefineOutcome out;
  const double tau = config.temperature;

  std::vector<Matrix> local_probs;
  local_probs.reserve(state.local_models.size());
  for (std::size_t k = 0; k < state.local_models.size(); ++k) {
    const std::size_t id = k < state.selected.size() ? state.selected[k] : k;
    local_probs.push_back(stabilized(state.local_models[k], pool_inputs, tau,
                                     "round " + std::to_string(state.round) + " client " + std::to_string(id),
                                     out.warnings));
  }

  if (config.use_rectified) {
    TeacherSet teachers;
    teachers.global_before = stabilized(state.global_before, pool_inputs, tau, "previous global model", out.warnings);
    teachers.global_after = stabilized(state.aggregated, pool_inputs, tau, "aggregated model", out.warnings);
    teachers.local_probs = std::move(local_probs);
    out.u_t = compute_ut(state.local_losses, state.aggregated.arch().num_classes);
    out.targets = rectified_targets(teachers, out.u_t);
  } else {
    out.u_t = 1.0;
    out.targets = avg_prob(local_probs, uniform_weights(local_probs.size()));
  }

  if (config.use_cluster_refinery && state.round >= config.cluster_skip_rounds &&
      !state.aggregated.arch().hidden_dims.empty()) {
    Matrix features = nn::extract_features(state.aggregated, pool_inputs);
    if (config.center_features) center_features(features);
    const ClassCentroids centroids = build_centroids(out.targets, features);
    out.targets = cluster_refine(centroids, features, tau);
  }

  out.model = refine_model(state.aggregated, pool_inputs, out.targets, distill_settings_for(config, state.round));
  return out;
}

RefineOutcome feddf_round_refine(const fed::RoundState& state, const Matrix& pool_inputs,
                                 const fed::ExperimentConfig& config) {
  check_state(state);
  std::vector<Matrix> logits;
  logits.reserve(state.local_models.size());
  for (const auto& m : state.local_models) logits.push_back(nn::forward_logits(m, pool_inputs));
  RefineOutcome out;
  out.targets = avg_logi(logits, uniform_weights(logits.size()));
  out.model = refine_model(state.aggregated, pool_inputs, out.targets, distill_settings_for(config, state.round));
  return out;
}

}  // namespace mrtf::refinery
