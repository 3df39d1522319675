#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrtf/fed/config.hpp"

namespace mrtf::diag {

/// One (pretraining steps, split) cell of the one-shot divergence probe.
struct ProbeRow {
  std::size_t pretrain_steps = 0;
  std::string split;  // "iid" or "noniid"
  double alpha = 0.0;
  double gradient_variance = 0.0;
  double weight_divergence = 0.0;
  double acc_initial = 0.0;
  double acc_centralized = 0.0;
  double acc_aggregated = 0.0;
};

struct ProbeReport {
  std::vector<ProbeRow> rows;
};

/// One-shot FL probe: pretrain centrally for r0 steps (theta_0), continue centrally
/// for probe_steps (theta_cen), and separately train probe_clients Dirichlet shards
/// for probe_steps each from theta_0 and average them (theta_agg). Measured for
/// each r0 in probe_pretrain_steps and for the IID and Non-IID alphas.
ProbeReport divergence_probe(const fed::ExperimentConfig& config);

/// CSV with a version comment line and a fixed header.
void write_probe_csv(std::ostream& out, const ProbeReport& report);

}  // namespace mrtf::diag
