#include "mrtf/refinery/cluster.hpp"

#include <cmath>

#include "mrtf/core/error.hpp"
#include "mrtf/nn/mlp.hpp"
#include "mrtf/simd/kernels.hpp"

namespace mrtf::refinery {

ClassCentroids build_centroids(const TeacherTargets& targets, const Matrix& features) {
  const Matrix& q = targets.probs;
  if (q.rows() == 0) throw ValueError("build_centroids: empty pool");
  if (features.cols() == 0) throw ValueError("build_centroids: zero-width features");
  if (features.rows() != q.rows()) throw DimensionError("feature rows", q.rows(), features.rows());

  const std::size_t classes = q.cols();
  ClassCentroids out{Matrix(classes, features.cols()), std::vector<double>(classes, 0.0)};
  for (std::size_t j = 0; j < q.rows(); ++j) {
    auto h = features.row(j);
    for (std::size_t c = 0; c < classes; ++c) {
      const double w = q(j, c);
      if (w == 0.0) continue;
      simd::axpy(w, h, out.centers.row(c));
      out.mass[c] += w;
    }
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (out.mass[c] > 0.0) simd::scale(1.0 / out.mass[c], out.centers.row(c));
  }
  return out;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(simd::squared_norm(a));
  const double nb = std::sqrt(simd::squared_norm(b));
  if (na == 0.0 || nb == 0.0) return kMaxCosineDistance;
  return 1.0 - simd::dot(a, b) / (na * nb);
}

void center_features(Matrix& features) {
  if (features.rows() == 0) return;
  std::vector<double> mean(features.cols(), 0.0);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const auto row = features.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) mean[j] += row[j];
  }
  for (auto& m : mean) m /= static_cast<double>(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    auto row = features.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] -= mean[j];
  }
}

TeacherTargets cluster_refine(const ClassCentroids& centroids, const Matrix& features, double tau) {
  if (!(tau > 0.0)) throw ValueError("cluster_refine: temperature must be positive");
  if (features.cols() != centroids.centers.cols()) {
    throw DimensionError("feature width", centroids.centers.cols(), features.cols());
  }
  const std::size_t classes = centroids.centers.rows();
  Matrix neg_dist(features.rows(), classes);
  for (std::size_t j = 0; j < features.rows(); ++j) {
    for (std::size_t c = 0; c < classes; ++c) {
      const double d = centroids.mass[c] < kMinCentroidMass
                           ? kMaxCosineDistance
                           : cosine_distance(features.row(j), centroids.centers.row(c));
      neg_dist(j, c) = -tau * d;
    }
  }
  return {nn::softmax(neg_dist), TargetSource::refined};
}

}  // namespace mrtf::refinery
