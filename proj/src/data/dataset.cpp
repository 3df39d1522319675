#include "mrtf/data/dataset.hpp"

#include <cmath>
#include <string>

#include "mrtf/core/error.hpp"

namespace mrtf::data {

void LabeledDataset::validate() const {
  if (labels.empty()) throw ValueError("dataset is empty");
  if (features.rows() != labels.size()) throw DimensionError("dataset feature rows", labels.size(), features.rows());
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw ValueError("dataset label " + std::to_string(y) + " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
  require_finite(features, "dataset features");
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out{gather_rows(features, indices), {}, num_classes};
  out.labels.reserve(indices.size());
  for (auto i : indices) out.labels.push_back(labels[i]);
  return out;
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

UnlabeledPool::UnlabeledPool(Matrix features, std::vector<int> eval_labels, std::size_t num_classes)
    : features_(std::move(features)), eval_labels_(std::move(eval_labels)), num_classes_(num_classes) {
  if (features_.rows() == 0) throw ValueError("unlabeled pool is empty");
  if (eval_labels_.size() != features_.rows()) {
    throw DimensionError("pool evaluation labels", features_.rows(), eval_labels_.size());
  }
}

UnlabeledPool UnlabeledPool::from_labeled(LabeledDataset dataset) {
  return UnlabeledPool(std::move(dataset.features), std::move(dataset.labels), dataset.num_classes);
}

}  // namespace mrtf::data
