#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "mrtf/data/dataset.hpp"

namespace mrtf::data {

struct ClientShard {
  std::size_t client_id = 0;
  LabeledDataset dataset;
  /// Row indices into the source dataset, ascending.
  std::vector<std::size_t> source_indices;

  std::size_t size() const noexcept { return dataset.size(); }
};

struct SplitByLabel {
  std::size_t classes_per_client;
};

struct SplitByDirichlet {
  double alpha;
};

struct PartitionSpec {
  std::variant<SplitByLabel, SplitByDirichlet> strategy;
  std::size_t clients = 1;
  std::uint64_t seed = 0;
};

/// Each client observes exactly `classes_per_client` classes. Classes are dealt
/// round-robin over a seeded class order; each class's samples are shuffled and
/// divided evenly among the clients that hold it. Throws ValueError when some
/// class would be left unassigned or a class has fewer samples than holders.
std::vector<ClientShard> partition_by_label(const LabeledDataset& src, std::size_t clients,
                                            std::size_t classes_per_client, std::uint64_t seed);

/// Per-client class proportions drawn from a symmetric Dirichlet(alpha). Each
/// class is divided among clients in proportion to those weights using
/// largest-remainder rounding, so class totals are conserved exactly. Empty
/// shards are repaired by moving one random sample from the largest shard.
std::vector<ClientShard> partition_by_dirichlet(const LabeledDataset& src, std::size_t clients, double alpha,
                                                std::uint64_t seed);

std::vector<ClientShard> partition(const LabeledDataset& src, const PartitionSpec& spec);

/// The per-client Dirichlet draws used by partition_by_dirichlet (clients x C, rows sum to 1).
std::vector<std::vector<double>> dirichlet_proportions(std::size_t clients, std::size_t num_classes, double alpha,
                                                       std::uint64_t seed);

}  // namespace mrtf::data
