#pragma once

// Arithmetic inner loops shared by the channel, phy and nn modules.
//
// Each kernel exists as a scalar reference and as ISA-specific variants
// (AVX2+FMA on x86-64, NEON on AArch64). A variant is selected once at
// runtime from the CPU features; RISDELAY_SIMD=scalar|avx2|neon|auto in the
// environment overrides the choice. Variants compute the same quantities and
// differ from the scalar reference only in floating-point summation order.

#include <complex>
#include <cstddef>
#include <string_view>

namespace risdelay::kernels {

using Complex = std::complex<double>;

struct KernelTable {
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);

  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // y = W x + b for row-major W (rows x cols). b may be null.
  void (*gemv)(const double* w, const double* x, const double* b, double* y,
               std::size_t rows, std::size_t cols);

  // y += W^T g for row-major W (rows x cols).
  void (*gemv_t_acc)(const double* w, const double* g, double* y,
                     std::size_t rows, std::size_t cols);

  // G += g x^T for row-major G (rows x cols).
  void (*rank1_acc)(double* grad, const double* g, const double* x,
                    std::size_t rows, std::size_t cols);

  // out[t] += sum_m weights[m] * rows[m * width + t]
  void (*complex_combine)(const Complex* weights, const Complex* rows,
                          Complex* out, std::size_t count, std::size_t width);

  // sum_i |v_i|^2
  double (*squared_norm)(const Complex* v, std::size_t n);
};

const KernelTable& scalar_table();

// Null when the variant was not compiled in or the CPU lacks the features.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// The table used by the library. Resolved on first use.
const KernelTable& active();

// Forces a variant by name ("scalar", "avx2", "neon", "auto"). Returns false
// and leaves the selection unchanged when the variant is unavailable.
bool select(std::string_view name);

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void gemv(const double* w, const double* x, const double* b, double* y,
                 std::size_t rows, std::size_t cols) {
  active().gemv(w, x, b, y, rows, cols);
}
inline void gemv_t_acc(const double* w, const double* g, double* y,
                       std::size_t rows, std::size_t cols) {
  active().gemv_t_acc(w, g, y, rows, cols);
}
inline void rank1_acc(double* grad, const double* g, const double* x,
                      std::size_t rows, std::size_t cols) {
  active().rank1_acc(grad, g, x, rows, cols);
}
inline void complex_combine(const Complex* weights, const Complex* rows,
                            Complex* out, std::size_t count, std::size_t width) {
  active().complex_combine(weights, rows, out, count, width);
}
inline double squared_norm(const Complex* v, std::size_t n) {
  return active().squared_norm(v, n);
}

}  // namespace risdelay::kernels
