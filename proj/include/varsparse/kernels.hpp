#pragma once

// Dense inner loops shared by sampling, training, ICA and the metrics.
//
// Each kernel exists as a scalar reference and as SIMD variants. The active
// table is picked once at startup from the CPU features (override with
// VARSPARSE_KERNELS=scalar|avx2|neon). All matrices are row-major and
// contiguous.

#include <cstddef>
#include <string_view>
#include <vector>

namespace varsparse::kernels {

struct KernelTable {
  const char* name;

  /// sums[c] = sum_r x[r, c]
  void (*column_sums)(const double* x, std::size_t rows, std::size_t cols, double* sums);

  /// x[r, c] -= offset[c], in place.
  void (*subtract_row)(double* x, std::size_t rows, std::size_t cols, const double* offset);

  /// out (xcols x ycols) = x^T y, with x rows x xcols and y rows x ycols.
  void (*cross_product)(const double* x, std::size_t rows, std::size_t xcols, const double* y,
                        std::size_t ycols, double* out);

  /// c (rows x cols) = a (rows x inner) * b (inner x cols).
  void (*matmul)(const double* a, std::size_t rows, std::size_t inner, const double* b,
                 std::size_t cols, double* c);
};

const KernelTable& scalar_table() noexcept;

/// Tables usable on this machine, scalar first.
std::vector<const KernelTable*> available_tables();

/// The table selected for this process.
const KernelTable& active();

/// Select a table by name; returns false if it is not available here.
bool select(std::string_view name);

namespace detail {
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;
}  // namespace detail

}  // namespace varsparse::kernels
