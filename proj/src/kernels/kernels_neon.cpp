// NEON variants for AArch64, 2 doubles per register. Only built on arm64.

#include <arm_neon.h>

#include "kernel_variants.hpp"

namespace risdelay::kernels {
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
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_neon(const double* w, const double* x, const double* b, double* y,
               std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double acc = dot_neon(w + r * cols, x, cols);
    y[r] = b != nullptr ? acc + b[r] : acc;
  }
}

void gemv_t_acc_neon(const double* w, const double* g, double* y,
                     std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_neon(g[r], w + r * cols, y, cols);
  }
}

void rank1_acc_neon(double* grad, const double* g, const double* x,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_neon(g[r], x, grad + r * cols, cols);
  }
}

// One complex value per register: (re, im).
void complex_combine_neon(const Complex* weights, const Complex* rows,
                          Complex* out, std::size_t count, std::size_t width) {
  const double* wd = reinterpret_cast<const double*>(weights);
  const double* rd = reinterpret_cast<const double*>(rows);
  double* od = reinterpret_cast<double*>(out);
  for (std::size_t m = 0; m < count; ++m) {
    const float64x2_t vr = vdupq_n_f64(wd[2 * m]);
    // (-wi, wi) so that swapped (xi, xr) yields (-wi*xi, wi*xr)
    const float64x2_t vi = {-wd[2 * m + 1], wd[2 * m + 1]};
    const double* row = rd + 2 * m * width;
    for (std::size_t t = 0; t < width; ++t) {
      const float64x2_t xv = vld1q_f64(row + 2 * t);
      const float64x2_t swapped = vextq_f64(xv, xv, 1);
      float64x2_t acc = vld1q_f64(od + 2 * t);
      acc = vfmaq_f64(acc, vr, xv);
      acc = vfmaq_f64(acc, vi, swapped);
      vst1q_f64(od + 2 * t, acc);
    }
  }
}

double squared_norm_neon(const Complex* v, std::size_t n) {
  const double* d = reinterpret_cast<const double*>(v);
  return dot_neon(d, d, 2 * n);
}

}  // namespace

namespace detail {
const KernelTable& neon_table_impl() {
  static const KernelTable table{
      "neon",          dot_neon,
      axpy_neon,       gemv_neon,
      gemv_t_acc_neon, rank1_acc_neon,
      complex_combine_neon, squared_norm_neon,
  };
  return table;
}
}  // namespace detail

}  // namespace risdelay::kernels
