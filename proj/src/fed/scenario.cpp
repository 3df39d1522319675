#include "mrtf/fed/scenario.hpp"

#include <algorithm>

#include "mrtf/core/rng.hpp"
#include "mrtf/data/blobs.hpp"
#include "mrtf/data/idx.hpp"

namespace mrtf::fed {

Scenario build_scenario(const ExperimentConfig& config) {
  config.validate();
  Scenario s;
  if (config.uses_idx()) {
    auto train = data::load_idx(config.idx_train_images, config.idx_train_labels);
    auto pool = data::load_idx(config.idx_pool_images, config.idx_pool_labels);
    const std::size_t classes = std::max({config.num_classes, train.num_classes, pool.num_classes});
    train.num_classes = pool.num_classes = classes;
    s.train = std::move(train);
    s.pool = data::UnlabeledPool::from_labeled(std::move(pool));
  } else {
    data::BlobSpec spec{config.num_classes, config.input_dim, config.train_per_class, config.separation,
                        derive_seed(config.data_seed, "blobs", {config.seed})};
    s.train = data::generate_blobs(spec, 0);
    spec.n_per_class = config.pool_per_class;
    const auto shift =
        config.domain_shift ? data::DomainShift::shifted(config.shift_seed) : data::DomainShift::identity();
    s.pool = data::UnlabeledPool::from_labeled(data::generate_blobs(spec, 1, shift));
  }

  data::PartitionSpec split;
  split.clients = config.clients;
  split.seed = derive_seed(config.seed, "partition");
  if (config.split == SplitKind::by_label) {
    split.strategy = data::SplitByLabel{config.classes_per_client};
  } else {
    split.strategy = data::SplitByDirichlet{config.alpha};
  }
  s.shards = data::partition(s.train, split);

  s.arch = nn::MlpArch{s.train.dim(), config.hidden_dims, s.train.num_classes, nn::Activation::relu};
  s.initial = nn::init_params(s.arch, derive_seed(config.seed, "model-init"));
  return s;
}

}  // namespace mrtf::fed
