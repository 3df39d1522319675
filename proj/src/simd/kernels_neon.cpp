#include <arm_neon.h>

#include "mrtf/simd/kernels.hpp"

namespace mrtf::simd {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t a = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), a, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_neon(double alpha, double* y, std::size_t n) {
  const float64x2_t a = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(vld1q_f64(y + i), a));
  for (; i < n; ++i) y[i] *= alpha;
}

void affine_neon(const double* w, const double* bias, const double* x, double* out, std::size_t rows,
                 std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = bias[r] + dot_neon(w + r * cols, x, cols);
}

void affine_transpose_accum_neon(const double* w, const double* delta, double* gx, std::size_t rows,
                                 std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (delta[r] != 0.0) axpy_neon(delta[r], w + r * cols, gx, cols);
  }
}

void outer_accum_neon(const double* delta, const double* x, double* g, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (delta[r] != 0.0) axpy_neon(delta[r], x, g + r * cols, cols);
  }
}

}  // namespace

const KernelTable& neon_kernels() {
  static constexpr KernelTable table{Isa::neon,  dot_neon,
                                     axpy_neon,  scale_neon,
                                     affine_neon, affine_transpose_accum_neon,
                                     outer_accum_neon};
  return table;
}

}  // namespace mrtf::simd
