#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mrtf/core/matrix.hpp"
#include "mrtf/fed/config.hpp"
#include "mrtf/fed/engine.hpp"
#include "mrtf/nn/mlp.hpp"
#include "mrtf/refinery/teachers.hpp"

namespace mrtf::refinery {

struct DistillSettings {
  std::size_t steps = 500;
  double lr = 0.0003;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
};

/// Adam on mean KL(targets || softmax(f(x))) over shuffled pool minibatches.
/// Throws ValueError, reporting the step and parameter norm, when the loss leaves
/// the finite domain.
nn::ParamVector refine_model(const nn::ParamVector& start, const Matrix& pool_inputs, const TeacherTargets& targets,
                             const DistillSettings& settings);

/// Which stages of the refinery run. Stabilized teachers are always on.
struct RefineStages {
  bool rectified = true;
  bool cluster = true;
};

struct RefineOutcome {
  nn::ParamVector model;
  TeacherTargets targets;
  double u_t = 1.0;
  std::vector<std::string> warnings;
};

/// Server-side refinery for one round:
/// normalize every teacher -> (entropy weights, u_t, rectified blend | plain average)
/// -> (clustered refinement from the aggregated model's features, after warm-up)
/// -> distill into the aggregated model.
RefineOutcome mrtf_round_refine(const fed::RoundState& state, const Matrix& pool_inputs,
                                const fed::ExperimentConfig& config);

/// FedDF refinement: distill the aggregated model towards softmax(mean local logits).
RefineOutcome feddf_round_refine(const fed::RoundState& state, const Matrix& pool_inputs,
                                 const fed::ExperimentConfig& config);

/// Minibatch stream used by refine_model for a given round.
DistillSettings distill_settings_for(const fed::ExperimentConfig& config, std::size_t round);

}  // namespace mrtf::refinery
