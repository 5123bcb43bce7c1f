#include "varsparse/kernels.hpp"

#include <algorithm>

namespace varsparse::kernels {
namespace {

void column_sums(const double* x, std::size_t rows, std::size_t cols, double* sums) {
  std::fill(sums, sums + cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = x + r * cols;
    for (std::size_t c = 0; c < cols; ++c) sums[c] += row[c];
  }
}

void subtract_row(double* x, std::size_t rows, std::size_t cols, const double* offset) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = x + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] -= offset[c];
  }
}

void cross_product(const double* x, std::size_t rows, std::size_t xcols, const double* y,
                   std::size_t ycols, double* out) {
  std::fill(out, out + xcols * ycols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x + r * xcols;
    const double* yr = y + r * ycols;
    for (std::size_t i = 0; i < xcols; ++i) {
      const double xi = xr[i];
      double* o = out + i * ycols;
      for (std::size_t j = 0; j < ycols; ++j) o[j] += xi * yr[j];
    }
  }
}

void matmul(const double* a, std::size_t rows, std::size_t inner, const double* b,
            std::size_t cols, double* c) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* ar = a + r * inner;
    double* cr = c + r * cols;
    std::fill(cr, cr + cols, 0.0);
    for (std::size_t k = 0; k < inner; ++k) {
      const double ak = ar[k];
      const double* bk = b + k * cols;
      for (std::size_t j = 0; j < cols; ++j) cr[j] += ak * bk[j];
    }
  }
}

constexpr KernelTable kScalar{"scalar", column_sums, subtract_row, cross_product, matmul};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace varsparse::kernels
