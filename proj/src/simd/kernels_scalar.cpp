#include "mrtf/simd/kernels.hpp"

namespace mrtf::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= alpha;
}

void affine_scalar(const double* w, const double* bias, const double* x, double* out, std::size_t rows,
                   std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = bias[r] + dot_scalar(w + r * cols, x, cols);
}

void affine_transpose_accum_scalar(const double* w, const double* delta, double* gx, std::size_t rows,
                                   std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(delta[r], w + r * cols, gx, cols);
}

void outer_accum_scalar(const double* delta, const double* x, double* g, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(delta[r], x, g + r * cols, cols);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static constexpr KernelTable table{Isa::scalar,  dot_scalar,
                                     axpy_scalar,  scale_scalar,
                                     affine_scalar, affine_transpose_accum_scalar,
                                     outer_accum_scalar};
  return table;
}

}  // namespace mrtf::simd
