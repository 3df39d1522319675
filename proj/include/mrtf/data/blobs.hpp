#pragma once

#include <cstddef>
#include <cstdint>

#include "mrtf/core/matrix.hpp"
#include "mrtf/data/dataset.hpp"

namespace mrtf::data {

/// Second-domain transform for cross-domain runs: a seeded orthogonal rotation
/// (Givens rotations by `rotation_angle` over a random pairing of coordinates),
/// a per-class mean offset of length `mean_offset` along a seeded direction, and
/// noise scaled by `noise_scale`.
struct DomainShift {
  bool enabled = false;
  std::uint64_t seed = 0;
  double rotation_angle = 0.35;
  double mean_offset = 1.0;
  double noise_scale = 1.5;

  static DomainShift identity() { return {}; }
  static DomainShift shifted(std::uint64_t seed) { return {true, seed, 0.35, 1.0, 1.5}; }
};

/// Gaussian class blobs. Class means are drawn once from `seed` with expected
/// pairwise distance `separation`; noise is unit variance per component.
struct BlobSpec {
  std::size_t num_classes = 10;
  std::size_t dim = 32;
  std::size_t n_per_class = 100;
  double separation = 6.0;
  std::uint64_t seed = 0;
};

/// Draws n_per_class samples of every class. Different `sample_stream` values give
/// independent draws around the same class means (e.g. train split vs server pool).
LabeledDataset generate_blobs(const BlobSpec& spec, std::uint64_t sample_stream = 0,
                              const DomainShift& shift = DomainShift::identity());

/// The class means used by generate_blobs (C x d), before any shift.
Matrix blob_means(const BlobSpec& spec);

/// The orthogonal matrix a shift applies (d x d). Identity when the shift is disabled.
Matrix shift_rotation(const DomainShift& shift, std::size_t dim);

}  // namespace mrtf::data
