#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mrtf/core/matrix.hpp"

namespace mrtf::diag {
class EvalAccess;
}

namespace mrtf::data {

/// Labeled samples: N x d features and N labels in [0, C).
struct LabeledDataset {
  Matrix features;
  std::vector<int> labels;
  std::size_t num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }

  /// Throws ValueError / DimensionError when an invariant is broken.
  void validate() const;
  /// Rows selected by index, preserving order.
  LabeledDataset subset(std::span<const std::size_t> indices) const;
  /// Samples per class.
  std::vector<std::size_t> class_counts() const;
};

/// The server's to-be-inferred samples. Their labels are held for evaluation only:
/// training code sees `features()`, and the labels are readable solely through
/// mrtf::diag::EvalAccess.
class UnlabeledPool {
 public:
  UnlabeledPool() = default;
  UnlabeledPool(Matrix features, std::vector<int> eval_labels, std::size_t num_classes);
  /// Strips labels from a labeled set into a pool.
  static UnlabeledPool from_labeled(LabeledDataset dataset);

  const Matrix& features() const noexcept { return features_; }
  std::size_t size() const noexcept { return features_.rows(); }
  std::size_t num_classes() const noexcept { return num_classes_; }

 private:
  friend class mrtf::diag::EvalAccess;

  Matrix features_;
  std::vector<int> eval_labels_;
  std::size_t num_classes_ = 0;
};

}  // namespace mrtf::data
