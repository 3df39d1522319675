#include "mrtf/diag/probe.hpp"

#include <algorithm>
#include <ostream>

#include "mrtf/core/rng.hpp"
#include "mrtf/data/blobs.hpp"
#include "mrtf/data/idx.hpp"
#include "mrtf/data/partition.hpp"
#include "mrtf/diag/metrics.hpp"
#include "mrtf/fed/engine.hpp"
#include "mrtf/fed/scenario.hpp"
#include "mrtf/io/reports.hpp"

namespace mrtf::diag {

ProbeReport divergence_probe(const fed::ExperimentConfig& config) {
  fed::ExperimentConfig base = config;
  base.clients = config.probe_clients;
  base.participation = 1.0;
  base.train_per_class = config.probe_train_per_class;
  base.pool_per_class = config.probe_test_per_class;
  // The scenario supplies the central training set, test pool and initialization;
  // its own shards are not used.
  base.split = fed::SplitKind::by_dirichlet;
  base.alpha = config.probe_iid_alpha;
  const fed::Scenario scenario = fed::build_scenario(base);
  const auto& test = scenario.pool;

  auto steps = config.probe_pretrain_steps;
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

  struct Level {
    const char* name;
    double alpha;
    std::vector<data::ClientShard> shards;
  };
  std::vector<Level> levels;
  for (auto [name, alpha] : {std::pair{"iid", config.probe_iid_alpha}, std::pair{"noniid", config.probe_noniid_alpha}}) {
    levels.push_back({name, alpha,
                      data::partition_by_dirichlet(scenario.train, config.probe_clients, alpha,
                                                   derive_seed(config.seed, "probe-split", {levels.size()}))});
  }

  ProbeReport report;
  nn::ParamVector theta0 = scenario.initial;
  auto pretrain_rng = make_stream(config.seed, "probe-pretrain");
  std::size_t done = 0;
  for (std::size_t r0 : steps) {
    fed::sgd_steps(theta0, scenario.train, r0 - done, config.probe_lr, config.momentum, config.batch_size,
                   pretrain_rng);
    done = r0;

    nn::ParamVector centralized = theta0;
    auto central_rng = make_stream(config.seed, "probe-central", {r0});
    fed::sgd_steps(centralized, scenario.train, config.probe_steps, config.probe_lr, config.momentum,
                   config.batch_size, central_rng);
    const double acc_initial = pool_accuracy(theta0, test);
    const double acc_centralized = pool_accuracy(centralized, test);

    for (std::size_t li = 0; li < levels.size(); ++li) {
      const auto& level = levels[li];
      std::vector<nn::ParamVector> locals;
      locals.reserve(level.shards.size());
      for (const auto& shard : level.shards) {
        nn::ParamVector local = theta0;
        auto rng = make_stream(config.seed, "probe-local", {r0, li, shard.client_id});
        fed::sgd_steps(local, shard.dataset, config.probe_steps, config.probe_lr, config.momentum, config.batch_size,
                       rng);
        locals.push_back(std::move(local));
      }
      const std::vector<double> weights(locals.size(), 1.0 / static_cast<double>(locals.size()));
      const nn::ParamVector aggregated = fed::aggregate_average(locals, weights);
      report.rows.push_back({r0, level.name, level.alpha, gradient_variance(locals, aggregated),
                             weight_divergence(aggregated, centralized), acc_initial, acc_centralized,
                             pool_accuracy(aggregated, test)});
    }
  }
  return report;
}

void write_probe_csv(std::ostream& out, const ProbeReport& report) {
  out << "# mrtf-probe v1\n";
  out << "pretrain_steps,split,alpha,gradient_variance,weight_divergence,acc_initial,acc_centralized,acc_aggregated\n";
  for (const auto& r : report.rows) {
    out << r.pretrain_steps << ',' << r.split << ',' << io::format_double(r.alpha) << ','
        << io::format_double(r.gradient_variance) << ',' << io::format_double(r.weight_divergence) << ','
        << io::format_double(r.acc_initial) << ',' << io::format_double(r.acc_centralized) << ','
        << io::format_double(r.acc_aggregated) << '\n';
  }
}

}  // namespace mrtf::diag
