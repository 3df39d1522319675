#include "mrtf/data/partition.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "mrtf/core/error.hpp"
#include "mrtf/core/rng.hpp"

namespace mrtf::data {

namespace {

std::vector<std::vector<std::size_t>> indices_by_class(const LabeledDataset& src) {
  std::vector<std::vector<std::size_t>> by_class(src.num_classes);
  for (std::size_t i = 0; i < src.size(); ++i) by_class[static_cast<std::size_t>(src.labels[i])].push_back(i);
  return by_class;
}

std::vector<ClientShard> build_shards(const LabeledDataset& src, std::vector<std::vector<std::size_t>> assigned) {
  std::vector<ClientShard> shards;
  shards.reserve(assigned.size());
  for (std::size_t k = 0; k < assigned.size(); ++k) {
    std::sort(assigned[k].begin(), assigned[k].end());
    ClientShard shard;
    shard.client_id = k;
    shard.dataset = src.subset(assigned[k]);
    shard.source_indices = std::move(assigned[k]);
    shards.push_back(std::move(shard));
  }
  return shards;
}

// Largest-remainder apportionment of `total` items over non-negative weights.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> counts(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  remainders.reserve(weights.size());
  std::size_t given = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double share = sum > 0.0 ? static_cast<double>(total) * weights[k] / sum
                                   : static_cast<double>(total) / static_cast<double>(weights.size());
    const double whole = std::floor(share);
    counts[k] = static_cast<std::size_t>(whole);
    given += counts[k];
    remainders.emplace_back(share - whole, k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; given < total; ++i, ++given) ++counts[remainders[i % remainders.size()].second];
  // Floating-point shares can overshoot by one in pathological cases.
  for (std::size_t k = weights.size(); given > total && k-- > 0;) {
    if (counts[k] > 0) {
      --counts[k];
      --given;
    }
  }
  return counts;
}

}  // namespace

std::vector<ClientShard> partition_by_label(const LabeledDataset& src, std::size_t clients,
                                            std::size_t classes_per_client, std::uint64_t seed) {
  src.validate();
  const std::size_t num_classes = src.num_classes;
  if (clients == 0) throw ValueError("partition_by_label: need at least one client");
  if (classes_per_client == 0 || classes_per_client > num_classes) {
    throw ValueError("partition_by_label: classes per client must lie in [1, " + std::to_string(num_classes) + "]");
  }
  if (clients * classes_per_client < num_classes) {
    throw ValueError("partition_by_label: " + std::to_string(clients) + " clients x " +
                     std::to_string(classes_per_client) + " classes cannot cover all " + std::to_string(num_classes) +
                     " classes");
  }

  auto rng = make_stream(seed, "split-by-label");
  std::vector<std::size_t> order(num_classes);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<std::size_t>> holders(num_classes);
  for (std::size_t k = 0; k < clients; ++k) {
    for (std::size_t j = 0; j < classes_per_client; ++j) {
      holders[order[(k * classes_per_client + j) % num_classes]].push_back(k);
    }
  }

  auto by_class = indices_by_class(src);
  std::vector<std::vector<std::size_t>> assigned(clients);
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& pool = by_class[c];
    const std::size_t h = holders[c].size();
    if (pool.size() < h) {
      throw ValueError("partition_by_label: class " + std::to_string(c) + " has " + std::to_string(pool.size()) +
                       " samples for " + std::to_string(h) + " clients");
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t base = pool.size() / h;
    const std::size_t extra = pool.size() % h;
    std::size_t cursor = 0;
    for (std::size_t j = 0; j < h; ++j) {
      const std::size_t take = base + (j < extra ? 1 : 0);
      auto& dst = assigned[holders[c][j]];
      dst.insert(dst.end(), pool.begin() + static_cast<std::ptrdiff_t>(cursor),
                 pool.begin() + static_cast<std::ptrdiff_t>(cursor + take));
      cursor += take;
    }
  }
  return build_shards(src, std::move(assigned));
}

std::vector<std::vector<double>> dirichlet_proportions(std::size_t clients, std::size_t num_classes, double alpha,
                                                       std::uint64_t seed) {
  if (!(alpha > 0.0)) throw ValueError("partition_by_dirichlet: alpha must be positive");
  auto rng = make_stream(seed, "dirichlet-proportions");
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<std::vector<double>> props(clients, std::vector<double>(num_classes, 0.0));
  for (auto& p : props) {
    double sum = 0.0;
    // Small alpha can underflow every draw to zero; redraw a bounded number of times.
    for (int attempt = 0; attempt < 64 && !(sum > 0.0); ++attempt) {
      sum = 0.0;
      for (double& v : p) {
        v = gamma(rng);
        sum += v;
      }
    }
    if (!(sum > 0.0)) {
      std::uniform_int_distribution<std::size_t> pick(0, num_classes - 1);
      std::fill(p.begin(), p.end(), 0.0);
      p[pick(rng)] = 1.0;
      sum = 1.0;
    }
    for (double& v : p) v /= sum;
  }
  return props;
}

std::vector<ClientShard> partition_by_dirichlet(const LabeledDataset& src, std::size_t clients, double alpha,
                                                std::uint64_t seed) {
  src.validate();
  if (clients == 0) throw ValueError("partition_by_dirichlet: need at least one client");
  if (src.size() < clients) {
    throw ValueError("partition_by_dirichlet: " + std::to_string(src.size()) + " samples cannot fill " +
                     std::to_string(clients) + " clients");
  }
  const auto props = dirichlet_proportions(clients, src.num_classes, alpha, seed);
  auto rng = make_stream(seed, "split-by-dirichlet");
  auto by_class = indices_by_class(src);

  std::vector<std::vector<std::size_t>> assigned(clients);
  std::vector<double> weights(clients);
  for (std::size_t c = 0; c < src.num_classes; ++c) {
    auto& pool = by_class[c];
    if (pool.empty()) continue;
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t k = 0; k < clients; ++k) weights[k] = props[k][c];
    const auto counts = apportion(pool.size(), weights);
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < clients; ++k) {
      assigned[k].insert(assigned[k].end(), pool.begin() + static_cast<std::ptrdiff_t>(cursor),
                         pool.begin() + static_cast<std::ptrdiff_t>(cursor + counts[k]));
      cursor += counts[k];
    }
  }

  for (std::size_t k = 0; k < clients; ++k) {
    if (!assigned[k].empty()) continue;
    std::size_t largest = 0;
    for (std::size_t j = 1; j < clients; ++j) {
      if (assigned[j].size() > assigned[largest].size()) largest = j;
    }
    std::uniform_int_distribution<std::size_t> pick(0, assigned[largest].size() - 1);
    const std::size_t at = pick(rng);
    assigned[k].push_back(assigned[largest][at]);
    assigned[largest].erase(assigned[largest].begin() + static_cast<std::ptrdiff_t>(at));
  }
  return build_shards(src, std::move(assigned));
}

std::vector<ClientShard> partition(const LabeledDataset& src, const PartitionSpec& spec) {
  if (const auto* by_label = std::get_if<SplitByLabel>(&spec.strategy)) {
    return partition_by_label(src, spec.clients, by_label->classes_per_client, spec.seed);
  }
  return partition_by_dirichlet(src, spec.clients, std::get<SplitByDirichlet>(spec.strategy).alpha, spec.seed);
}

}  // namespace mrtf::data
