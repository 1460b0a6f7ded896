// AVX2 + FMA variants, 4 doubles per lane group. Compiled with -mavx2 -mfma.

#include <immintrin.h>

#include "kernel_variants.hpp"

namespace risdelay::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four rows per pass so each load of x feeds four accumulators.
void gemv_avx2(const double* w, const double* x, const double* b, double* y,
               std::size_t rows, std::size_t cols) {
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    const double* w0 = w + r * cols;
    const double* w1 = w0 + cols;
    const double* w2 = w1 + cols;
    const double* w3 = w2 + cols;
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d xv = _mm256_loadu_pd(x + c);
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + c), xv, a0);
      a1 = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + c), xv, a1);
      a2 = _mm256_fmadd_pd(_mm256_loadu_pd(w2 + c), xv, a2);
      a3 = _mm256_fmadd_pd(_mm256_loadu_pd(w3 + c), xv, a3);
    }
    double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
    for (; c < cols; ++c) {
      s0 += w0[c] * x[c];
      s1 += w1[c] * x[c];
      s2 += w2[c] * x[c];
      s3 += w3[c] * x[c];
    }
    if (b != nullptr) {
      s0 += b[r];
      s1 += b[r + 1];
      s2 += b[r + 2];
      s3 += b[r + 3];
    }
    y[r] = s0;
    y[r + 1] = s1;
    y[r + 2] = s2;
    y[r + 3] = s3;
  }
  for (; r < rows; ++r) {
    const double acc = dot_avx2(w + r * cols, x, cols);
    y[r] = b != nullptr ? acc + b[r] : acc;
  }
}

void gemv_t_acc_avx2(const double* w, const double* g, double* y,
                     std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_avx2(g[r], w + r * cols, y, cols);
  }
}

void rank1_acc_avx2(double* grad, const double* g, const double* x,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_avx2(g[r], x, grad + r * cols, cols);
  }
}

// Interleaved (re, im) pairs; two complex values per register.
void complex_combine_avx2(const Complex* weights, const Complex* rows,
                          Complex* out, std::size_t count, std::size_t width) {
  const double* wd = reinterpret_cast<const double*>(weights);
  const double* rd = reinterpret_cast<const double*>(rows);
  double* od = reinterpret_cast<double*>(out);
  for (std::size_t m = 0; m < count; ++m) {
    const double wr = wd[2 * m];
    const double wi = wd[2 * m + 1];
    const __m256d vr = _mm256_set1_pd(wr);
    const __m256d vi = _mm256_set1_pd(wi);
    const double* row = rd + 2 * m * width;
    std::size_t t = 0;
    for (; t + 2 <= width; t += 2) {
      const __m256d xv = _mm256_loadu_pd(row + 2 * t);
      const __m256d swapped = _mm256_permute_pd(xv, 0b0101);
      // even lanes: wr*xr - wi*xi, odd lanes: wr*xi + wi*xr
      const __m256d prod = _mm256_fmaddsub_pd(vr, xv, _mm256_mul_pd(vi, swapped));
      _mm256_storeu_pd(od + 2 * t, _mm256_add_pd(_mm256_loadu_pd(od + 2 * t), prod));
    }
    for (; t < width; ++t) {
      const double xr = row[2 * t];
      const double xi = row[2 * t + 1];
      od[2 * t] += wr * xr - wi * xi;
      od[2 * t + 1] += wr * xi + wi * xr;
    }
  }
}

double squared_norm_avx2(const Complex* v, std::size_t n) {
  const double* d = reinterpret_cast<const double*>(v);
  return dot_avx2(d, d, 2 * n);
}

}  // namespace

namespace detail {
const KernelTable& avx2_table_impl() {
  static const KernelTable table{
      "avx2",          dot_avx2,
      axpy_avx2,       gemv_avx2,
      gemv_t_acc_avx2, rank1_acc_avx2,
      complex_combine_avx2, squared_norm_avx2,
  };
  return table;
}
}  // namespace detail

}  // namespace risdelay::kernels
