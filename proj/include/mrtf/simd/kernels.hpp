#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

// Dense arithmetic kernels behind the MLP, optimizers and aggregation.
//
// Every kernel exists as a scalar reference implementation plus vectorized
// variants (AVX2+FMA on x86-64, NEON on AArch64). The active variant is picked
// once at startup from CPU features, overridable through MRTF_SIMD=scalar|avx2|neon
// or set_active_isa(). Vector variants reassociate sums and fuse multiply-adds,
// so they agree with the scalar reference to rounding, not bit-for-bit. A single
// process always uses one variant, which keeps runs reproducible.

namespace mrtf::simd {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  Isa isa;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y *= alpha
  void (*scale)(double alpha, double* y, std::size_t n);
  /// out[r] = bias[r] + dot(W[r, :], x) for a row-major rows x cols W.
  void (*affine)(const double* w, const double* bias, const double* x, double* out, std::size_t rows,
                 std::size_t cols);
  /// gx[c] += sum_r delta[r] * W[r, c]
  void (*affine_transpose_accum)(const double* w, const double* delta, double* gx, std::size_t rows,
                                 std::size_t cols);
  /// G[r, c] += delta[r] * x[c]
  void (*outer_accum)(const double* delta, const double* x, double* g, std::size_t rows, std::size_t cols);
};

const KernelTable& scalar_kernels();
#if defined(MRTF_HAS_AVX2)
const KernelTable& avx2_kernels();
#endif
#if defined(MRTF_HAS_NEON)
const KernelTable& neon_kernels();
#endif

/// True when the variant was compiled in and the running CPU supports it.
bool isa_supported(Isa isa);
/// Table for a specific variant. Throws mrtf::ValueError when unsupported.
const KernelTable& kernels_for(Isa isa);

/// The process-wide active table.
const KernelTable& kernels();
Isa active_isa();
/// Switches the active variant. Throws mrtf::ValueError when unsupported.
void set_active_isa(Isa isa);

std::string_view isa_name(Isa isa);
std::optional<Isa> parse_isa(std::string_view name);

// Span conveniences over the active table.
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> y);
double squared_norm(std::span<const double> x);

}  // namespace mrtf::simd
