#include "risdelay/kernels.hpp"

namespace risdelay::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* w, const double* x, const double* b, double* y,
                 std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double acc = dot_scalar(w + r * cols, x, cols);
    y[r] = b != nullptr ? acc + b[r] : acc;
  }
}

void gemv_t_acc_scalar(const double* w, const double* g, double* y,
                       std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_scalar(g[r], w + r * cols, y, cols);
  }
}

void rank1_acc_scalar(double* grad, const double* g, const double* x,
                      std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_scalar(g[r], x, grad + r * cols, cols);
  }
}

// Written out explicitly: std::complex operator* goes through the C99 Annex G
// NaN-recovery path, which is slow and not what the SIMD variants compute.
void complex_combine_scalar(const Complex* weights, const Complex* rows,
                            Complex* out, std::size_t count, std::size_t width) {
  for (std::size_t m = 0; m < count; ++m) {
    const double wr = weights[m].real();
    const double wi = weights[m].imag();
    const Complex* row = rows + m * width;
    for (std::size_t t = 0; t < width; ++t) {
      const double xr = row[t].real();
      const double xi = row[t].imag();
      out[t] = Complex(out[t].real() + (wr * xr - wi * xi),
                       out[t].imag() + (wr * xi + wi * xr));
    }
  }
}

double squared_norm_scalar(const Complex* v, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += v[i].real() * v[i].real() + v[i].imag() * v[i].imag();
  }
  return acc;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",          dot_scalar,
      axpy_scalar,       gemv_scalar,
      gemv_t_acc_scalar, rank1_acc_scalar,
      complex_combine_scalar, squared_norm_scalar,
  };
  return table;
}

}  // namespace risdelay::kernels
