#include "mrtf/data/blobs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mrtf/core/error.hpp"
#include "mrtf/core/rng.hpp"

namespace mrtf::data {

namespace {

void check_spec(const BlobSpec& spec) {
  if (spec.num_classes < 2) throw ValueError("generate_blobs: need at least 2 classes");
  if (spec.dim < 2) throw ValueError("generate_blobs: need at least 2 dimensions");
  if (spec.n_per_class < 1) throw ValueError("generate_blobs: need at least 1 sample per class");
  if (!(spec.separation >= 0.0)) throw ValueError("generate_blobs: separation must be non-negative");
}

}  // namespace

Matrix blob_means(const BlobSpec& spec) {
  check_spec(spec);
  auto rng = make_stream(spec.seed, "blob-means");
  std::normal_distribution<double> normal(0.0, spec.separation / std::sqrt(2.0 * static_cast<double>(spec.dim)));
  Matrix means(spec.num_classes, spec.dim);
  for (double& v : means.values()) v = normal(rng);
  return means;
}

Matrix shift_rotation(const DomainShift& shift, std::size_t dim) {
  Matrix q(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) q(i, i) = 1.0;
  if (!shift.enabled) return q;
  auto rng = make_stream(shift.seed, "shift-rotation");
  std::vector<std::size_t> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const double c = std::cos(shift.rotation_angle);
  const double s = std::sin(shift.rotation_angle);
  // Disjoint Givens rotations commute, so q is the block rotation on each pair.
  for (std::size_t p = 0; p + 1 < dim; p += 2) {
    const std::size_t a = order[p];
    const std::size_t b = order[p + 1];
    q(a, a) = c;
    q(a, b) = -s;
    q(b, a) = s;
    q(b, b) = c;
  }
  return q;
}

LabeledDataset generate_blobs(const BlobSpec& spec, std::uint64_t sample_stream, const DomainShift& shift) {
  Matrix means = blob_means(spec);
  const std::size_t d = spec.dim;

  double noise_scale = 1.0;
  if (shift.enabled) {
    auto rng = make_stream(shift.seed, "shift-offsets");
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
      std::vector<double> dir(d);
      double norm = 0.0;
      for (double& v : dir) {
        v = normal(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      for (std::size_t j = 0; j < d; ++j) means(c, j) += shift.mean_offset * dir[j] / norm;
    }
    noise_scale = shift.noise_scale;
  }

  LabeledDataset out{Matrix(spec.num_classes * spec.n_per_class, d), {}, spec.num_classes};
  out.labels.reserve(out.features.rows());
  auto rng = make_stream(spec.seed, "blob-samples", {sample_stream});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t row = 0;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t i = 0; i < spec.n_per_class; ++i, ++row) {
      auto x = out.features.row(row);
      for (std::size_t j = 0; j < d; ++j) x[j] = means(c, j) + noise_scale * normal(rng);
      out.labels.push_back(static_cast<int>(c));
    }
  }

  if (shift.enabled) {
    const Matrix q = shift_rotation(shift, d);
    std::vector<double> tmp(d);
    for (std::size_t r = 0; r < out.features.rows(); ++r) {
      auto x = out.features.row(r);
      for (std::size_t a = 0; a < d; ++a) {
        double acc = 0.0;
        for (std::size_t b = 0; b < d; ++b) acc += q(a, b) * x[b];
        tmp[a] = acc;
      }
      std::copy(tmp.begin(), tmp.end(), x.begin());
    }
  }
  return out;
}

}  // namespace mrtf::data
