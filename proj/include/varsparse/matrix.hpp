#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>

namespace varsparse {

// All sample matrices are row-major: one observation per row. The SIMD
// kernels rely on this layout.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline std::span<const double> row_span(const Matrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

bool all_finite(const Matrix& m);

}  // namespace varsparse
