#include "mrtf/diag/ensemble_demo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "mrtf/core/error.hpp"
#include "mrtf/core/rng.hpp"
#include "mrtf/diag/metrics.hpp"
#include "mrtf/fed/engine.hpp"
#include "mrtf/fed/scenario.hpp"
#include "mrtf/refinery/teachers.hpp"

namespace mrtf::diag {

namespace {

std::size_t argmax_flips(const Matrix& a, const Matrix& b) {
  std::size_t flips = 0;
  for (std::size_t i = 0; i < a.rows(); ++i) flips += argmax(a.row(i)) != argmax(b.row(i));
  return flips;
}

double mean_l1(const Matrix& a, const Matrix& b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) total += std::abs(a.values()[i] - b.values()[i]);
  return total / static_cast<double>(a.rows());
}

}  // namespace

EnsembleDemoReport ensemble_demo(const fed::ExperimentConfig& config, const EnsembleDemoOptions& options) {
  if (options.clients != options.skewed_weights.size() || options.clients != options.sample_fractions.size()) {
    throw ValueError("ensemble_demo: skewed weights and sample fractions need one entry per client");
  }
  if (options.clients * options.classes_per_client > config.num_classes) {
    throw ValueError("ensemble_demo: clients * classes_per_client exceeds the class count");
  }
  fed::ExperimentConfig sized = config;
  sized.train_per_class = options.train_per_class;
  sized.pool_per_class = options.pool_per_class;
  const fed::Scenario scenario = fed::build_scenario(sized);
  const Matrix& pool = scenario.pool.features();
  const std::size_t C = scenario.arch.num_classes;

  // Disjoint class pairs, all training samples of those classes.
  std::vector<int> class_order(C);
  std::iota(class_order.begin(), class_order.end(), 0);
  auto class_rng = make_stream(config.seed, "demo-classes");
  std::shuffle(class_order.begin(), class_order.end(), class_rng);
  std::vector<data::ClientShard> shards(options.clients);
  for (std::size_t k = 0; k < options.clients; ++k) {
    const auto first = class_order.begin() + static_cast<std::ptrdiff_t>(k * options.classes_per_client);
    const std::vector<int> mine(first, first + static_cast<std::ptrdiff_t>(options.classes_per_client));
    shards[k].client_id = k;
    for (int c : mine) {
      std::vector<std::size_t> of_class;
      for (std::size_t i = 0; i < scenario.train.size(); ++i) {
        if (scenario.train.labels[i] == c) of_class.push_back(i);
      }
      const auto keep = std::max<std::size_t>(
          1, static_cast<std::size_t>(options.sample_fractions[k] * static_cast<double>(of_class.size())));
      shards[k].source_indices.insert(shards[k].source_indices.end(), of_class.begin(),
                                      of_class.begin() + static_cast<std::ptrdiff_t>(std::min(keep, of_class.size())));
    }
    std::sort(shards[k].source_indices.begin(), shards[k].source_indices.end());
    shards[k].dataset = scenario.train.subset(shards[k].source_indices);
  }

  nn::ParamVector global_before = scenario.initial;
  auto pretrain_rng = make_stream(config.seed, "demo-pretrain");
  fed::sgd_steps(global_before, scenario.train, options.global_pretrain_steps, config.local_lr, config.momentum,
                 config.batch_size, pretrain_rng);

  std::vector<nn::ParamVector> locals;
  std::vector<double> losses;
  for (const auto& shard : shards) {
    auto result = fed::local_update(global_before, shard, config, 0);
    locals.push_back(std::move(result.params));
    losses.push_back(result.mean_loss);
  }
  const std::vector<double> uniform(options.clients, 1.0 / static_cast<double>(options.clients));
  const nn::ParamVector global_after = fed::aggregate_average(locals, uniform);

  EnsembleDemoReport report;
  std::vector<Matrix> logits;
  std::vector<Matrix> raw_probs;
  std::vector<Matrix> stabilized;
  for (const auto& local : locals) {
    logits.push_back(nn::forward_logits(local, pool));
    raw_probs.push_back(nn::softmax(logits.back()));
    stabilized.push_back(refinery::normalize_logits(logits.back(), config.temperature).probs);
    report.acc_locals.push_back(pool_accuracy(local, scenario.pool));
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < C; ++c) {
      double sum = 0.0;
      for (std::size_t i = 0; i < pool.rows(); ++i) sum += logits.back()(i, c);
      top = std::max(top, sum / static_cast<double>(pool.rows()));
    }
    report.max_mean_logit.push_back(top);
  }
  report.acc_global_before = pool_accuracy(global_before, scenario.pool);
  report.acc_global_after = pool_accuracy(global_after, scenario.pool);

  const auto logi = refinery::avg_logi(logits, uniform);
  const auto prob = refinery::avg_prob(stabilized, uniform);
  report.acc_avg_logi = targets_accuracy(logi.probs, scenario.pool);
  const auto prob_raw = refinery::avg_prob(raw_probs, uniform);
  report.acc_avg_prob_raw = targets_accuracy(prob_raw.probs, scenario.pool);
  report.acc_avg_prob = targets_accuracy(prob.probs, scenario.pool);

  refinery::TeacherSet teachers;
  teachers.local_probs = stabilized;
  teachers.global_before = refinery::normalize_logits(nn::forward_logits(global_before, pool), config.temperature).probs;
  teachers.global_after = refinery::normalize_logits(nn::forward_logits(global_after, pool), config.temperature).probs;
  report.u_t = refinery::compute_ut(losses, C);
  report.acc_rectified = targets_accuracy(refinery::rectified_targets(teachers, report.u_t).probs, scenario.pool);

  const std::span<const double> skew(options.skewed_weights);
  const auto logi_skew = refinery::avg_logi(logits, skew);
  const auto prob_skew = refinery::avg_prob(stabilized, skew);
  const auto prob_raw_skew = refinery::avg_prob(raw_probs, skew);
  report.skew_flips_avg_logi = argmax_flips(logi.probs, logi_skew.probs);
  report.skew_flips_avg_prob = argmax_flips(prob.probs, prob_skew.probs);
  report.skew_flips_avg_prob_raw = argmax_flips(prob_raw.probs, prob_raw_skew.probs);
  report.skew_shift_avg_logi = mean_l1(logi.probs, logi_skew.probs);
  report.skew_shift_avg_prob = mean_l1(prob.probs, prob_skew.probs);
  report.skew_shift_avg_prob_raw = mean_l1(prob_raw.probs, prob_raw_skew.probs);
  return report;
}

void write_demo_report(std::ostream& out, const EnsembleDemoReport& report) {
  out << "local accuracies:";
  for (double a : report.acc_locals) out << ' ' << a;
  out << "\nlargest mean logit per local:";
  for (double m : report.max_mean_logit) out << ' ' << m;
  out << "\nglobal before " << report.acc_global_before << ", global after " << report.acc_global_after << '\n'
      << "avg_logi " << report.acc_avg_logi << '\n'
      << "avg_prob (raw softmax) " << report.acc_avg_prob_raw << '\n'
      << "avg_prob (stabilized) " << report.acc_avg_prob << '\n'
      << "rectified " << report.acc_rectified << " (u_t " << report.u_t << ")\n"
      << "argmax flips under skewed weights: avg_logi " << report.skew_flips_avg_logi << ", avg_prob "
      << report.skew_flips_avg_prob << ", avg_prob raw " << report.skew_flips_avg_prob_raw << '\n'
      << "mean L1 target shift under skewed weights: avg_logi " << report.skew_shift_avg_logi << ", avg_prob "
      << report.skew_shift_avg_prob << ", avg_prob raw " << report.skew_shift_avg_prob_raw << '\n';
}

}  // namespace mrtf::diag
