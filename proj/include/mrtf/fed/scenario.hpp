#pragma once

#include <vector>

#include "mrtf/data/dataset.hpp"
#include "mrtf/data/partition.hpp"
#include "mrtf/fed/config.hpp"
#include "mrtf/nn/mlp.hpp"

namespace mrtf::fed {

/// Materialized inputs of a run: client shards, the server pool, the model shape
/// and its seeded initialization.
struct Scenario {
  data::LabeledDataset train;
  std::vector<data::ClientShard> shards;
  data::UnlabeledPool pool;
  nn::MlpArch arch;
  nn::ParamVector initial;
};

/// Builds shards and pool from either IDX files or synthetic blobs. With
/// `domain_shift` set, the pool is drawn from the shifted domain.
Scenario build_scenario(const ExperimentConfig& config);

}  // namespace mrtf::fed
