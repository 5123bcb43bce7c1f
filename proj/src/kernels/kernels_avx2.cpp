#include "varsparse/kernels.hpp"

#include <immintrin.h>

#include <algorithm>

// Compiled with -mavx2 -mfma; only reached after a runtime cpuid check.

namespace varsparse::kernels {
namespace {

void column_sums(const double* x, std::size_t rows, std::size_t cols, double* sums) {
  std::fill(sums, sums + cols, 0.0);
  const std::size_t vec_end = cols - cols % 4;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = x + r * cols;
    std::size_t c = 0;
    for (; c < vec_end; c += 4) {
      __m256d acc = _mm256_loadu_pd(sums + c);
      acc = _mm256_add_pd(acc, _mm256_loadu_pd(row + c));
      _mm256_storeu_pd(sums + c, acc);
    }
    for (; c < cols; ++c) sums[c] += row[c];
  }
}

void subtract_row(double* x, std::size_t rows, std::size_t cols, const double* offset) {
  const std::size_t vec_end = cols - cols % 4;
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = x + r * cols;
    std::size_t c = 0;
    for (; c < vec_end; c += 4) {
      _mm256_storeu_pd(row + c, _mm256_sub_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(offset + c)));
    }
    for (; c < cols; ++c) row[c] -= offset[c];
  }
}

void cross_product(const double* x, std::size_t rows, std::size_t xcols, const double* y,
                   std::size_t ycols, double* out) {
  std::fill(out, out + xcols * ycols, 0.0);
  const std::size_t vec_end = ycols - ycols % 4;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x + r * xcols;
    const double* yr = y + r * ycols;
    for (std::size_t i = 0; i < xcols; ++i) {
      const __m256d xi = _mm256_set1_pd(xr[i]);
      double* o = out + i * ycols;
      std::size_t j = 0;
      for (; j < vec_end; j += 4) {
        _mm256_storeu_pd(o + j, _mm256_fmadd_pd(xi, _mm256_loadu_pd(yr + j), _mm256_loadu_pd(o + j)));
      }
      for (; j < ycols; ++j) o[j] += xr[i] * yr[j];
    }
  }
}

void matmul(const double* a, std::size_t rows, std::size_t inner, const double* b,
            std::size_t cols, double* c) {
  const std::size_t vec_end = cols - cols % 4;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* ar = a + r * inner;
    double* cr = c + r * cols;
    std::fill(cr, cr + cols, 0.0);
    for (std::size_t k = 0; k < inner; ++k) {
      const __m256d ak = _mm256_set1_pd(ar[k]);
      const double* bk = b + k * cols;
      std::size_t j = 0;
      for (; j < vec_end; j += 4) {
        _mm256_storeu_pd(cr + j, _mm256_fmadd_pd(ak, _mm256_loadu_pd(bk + j), _mm256_loadu_pd(cr + j)));
      }
      for (; j < cols; ++j) cr[j] += ar[k] * bk[j];
    }
  }
}

constexpr KernelTable kAvx2{"avx2", column_sums, subtract_row, cross_product, matmul};

}  // namespace

namespace detail {
const KernelTable* avx2_table() noexcept { return &kAvx2; }
}  // namespace detail

}  // namespace varsparse::kernels
