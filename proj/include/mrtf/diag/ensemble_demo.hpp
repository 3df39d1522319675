#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "mrtf/fed/config.hpp"

namespace mrtf::diag {

struct EnsembleDemoOptions {
  std::size_t clients = 3;
  std::size_t classes_per_client = 2;
  /// Central SGD steps giving the global model its starting accuracy before the round.
  std::size_t global_pretrain_steps = 20;
  std::array<double, 3> skewed_weights{0.6, 0.3, 0.1};
  /// Share of its classes' training samples each client keeps (quantity skew).
  std::array<double, 3> sample_fractions{1.0, 0.3, 0.1};
  /// Blob sizes, replacing the config's; ignored with IDX data.
  std::size_t train_per_class = 200;
  std::size_t pool_per_class = 100;
};

struct EnsembleDemoReport {
  std::vector<double> acc_locals;
  double acc_global_before = 0.0;
  double acc_global_after = 0.0;
  double acc_avg_logi = 0.0;
  /// Average of raw softmax outputs, no logit standardization.
  double acc_avg_prob_raw = 0.0;
  /// Average of stabilized teachers.
  double acc_avg_prob = 0.0;
  double acc_rectified = 0.0;
  double u_t = 0.0;
  /// Pool samples whose argmax moves when uniform weights become skewed_weights.
  std::size_t skew_flips_avg_logi = 0;
  std::size_t skew_flips_avg_prob = 0;
  std::size_t skew_flips_avg_prob_raw = 0;
  /// Mean L1 distance between the uniform and skew-weighted target rows.
  double skew_shift_avg_logi = 0.0;
  double skew_shift_avg_prob = 0.0;
  double skew_shift_avg_prob_raw = 0.0;
  /// Largest mean per-class logit of each local model.
  std::vector<double> max_mean_logit;
};

/// One round on a pool where each client sees only a few classes: local training
/// from a shared global model, then the accuracy of every ensembling rule on the pool.
/// Uses the blob and model settings of `config` apart from the sizes in `options`;
/// its partition keys are ignored.
EnsembleDemoReport ensemble_demo(const fed::ExperimentConfig& config, const EnsembleDemoOptions& options = {});

void write_demo_report(std::ostream& out, const EnsembleDemoReport& report);

}  // namespace mrtf::diag
