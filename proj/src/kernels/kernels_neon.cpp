#include "varsparse/kernels.hpp"

#include <arm_neon.h>

#include <algorithm>

// AArch64 only; NEON is part of the baseline ISA there.

namespace varsparse::kernels {
namespace {

void column_sums(const double* x, std::size_t rows, std::size_t cols, double* sums) {
  std::fill(sums, sums + cols, 0.0);
  const std::size_t vec_end = cols - cols % 2;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = x + r * cols;
    std::size_t c = 0;
    for (; c < vec_end; c += 2) vst1q_f64(sums + c, vaddq_f64(vld1q_f64(sums + c), vld1q_f64(row + c)));
    for (; c < cols; ++c) sums[c] += row[c];
  }
}

void subtract_row(double* x, std::size_t rows, std::size_t cols, const double* offset) {
  const std::size_t vec_end = cols - cols % 2;
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = x + r * cols;
    std::size_t c = 0;
    for (; c < vec_end; c += 2) vst1q_f64(row + c, vsubq_f64(vld1q_f64(row + c), vld1q_f64(offset + c)));
    for (; c < cols; ++c) row[c] -= offset[c];
  }
}

void cross_product(const double* x, std::size_t rows, std::size_t xcols, const double* y,
                   std::size_t ycols, double* out) {
  std::fill(out, out + xcols * ycols, 0.0);
  const std::size_t vec_end = ycols - ycols % 2;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x + r * xcols;
    const double* yr = y + r * ycols;
    for (std::size_t i = 0; i < xcols; ++i) {
      const float64x2_t xi = vdupq_n_f64(xr[i]);
      double* o = out + i * ycols;
      std::size_t j = 0;
      for (; j < vec_end; j += 2) vst1q_f64(o + j, vfmaq_f64(vld1q_f64(o + j), xi, vld1q_f64(yr + j)));
      for (; j < ycols; ++j) o[j] += xr[i] * yr[j];
    }
  }
}

void matmul(const double* a, std::size_t rows, std::size_t inner, const double* b,
            std::size_t cols, double* c) {
  const std::size_t vec_end = cols - cols % 2;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* ar = a + r * inner;
    double* cr = c + r * cols;
    std::fill(cr, cr + cols, 0.0);
    for (std::size_t k = 0; k < inner; ++k) {
      const float64x2_t ak = vdupq_n_f64(ar[k]);
      const double* bk = b + k * cols;
      std::size_t j = 0;
      for (; j < vec_end; j += 2) vst1q_f64(cr + j, vfmaq_f64(vld1q_f64(cr + j), ak, vld1q_f64(bk + j)));
      for (; j < cols; ++j) cr[j] += ar[k] * bk[j];
    }
  }
}

constexpr KernelTable kNeon{"neon", column_sums, subtract_row, cross_product, matmul};

}  // namespace

namespace detail {
const KernelTable* neon_table() noexcept { return &kNeon; }
}  // namespace detail

}  // namespace varsparse::kernels
