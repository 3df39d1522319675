#pragma once

#include <vector>

#include "mrtf/core/matrix.hpp"
#include "mrtf/refinery/teachers.hpp"

namespace mrtf::refinery {

/// Soft class centroids in feature space.
struct ClassCentroids {
  Matrix centers;            // C x H
  std::vector<double> mass;  // sum over the pool of q_c(x)
};

/// Classes whose total target mass is below this get no centroid.
inline constexpr double kMinCentroidMass = 1e-6;

/// Cosine distance assigned to undefined centroids and zero-norm vectors.
inline constexpr double kMaxCosineDistance = 2.0;

/// v_c = sum_x q_c(x) h(x) / sum_x q_c(x).
ClassCentroids build_centroids(const TeacherTargets& targets, const Matrix& features);

/// 1 - cos(a, b); kMaxCosineDistance when either vector has zero norm.
double cosine_distance(std::span<const double> a, std::span<const double> b);

/// Subtracts the per-column mean over the pool. Non-negative (post-ReLU) features
/// otherwise crowd into one orthant where every cosine distance is small.
void center_features(Matrix& features);

/// One soft-assignment step: q(x) = softmax_c(-tau * D(h(x), v_c)).
TeacherTargets cluster_refine(const ClassCentroids& centroids, const Matrix& features, double tau);

}  // namespace mrtf::refinery
