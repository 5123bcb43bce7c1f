#include "varsparse/metrics.hpp"

#include "varsparse/error.hpp"
#include "varsparse/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace varsparse {

bool effectively_constant(double variance, double mean_square) noexcept {
  return variance <= kZeroVariance * mean_square;
}

namespace {

struct CenteredColumns {
  Matrix centered;
  std::vector<double> variance;
  std::vector<bool> constant;
};

CenteredColumns center(const Matrix& x) {
  const auto& k = kernels::active();
  const auto rows = static_cast<std::size_t>(x.rows());
  const auto cols = static_cast<std::size_t>(x.cols());
  CenteredColumns out{x, std::vector<double>(cols), std::vector<bool>(cols)};
  std::vector<double> mean(cols);
  k.column_sums(x.data(), rows, cols, mean.data());
  for (double& m : mean) m /= static_cast<double>(rows);
  k.subtract_row(out.centered.data(), rows, cols, mean.data());
  for (std::size_t c = 0; c < cols; ++c) {
    const double var = out.centered.col(static_cast<Eigen::Index>(c)).squaredNorm() / static_cast<double>(rows);
    out.variance[c] = var;
    out.constant[c] = effectively_constant(var, var + mean[c] * mean[c]);
  }
  return out;
}

}  // namespace

CorrelationMatrix pearson(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) fail(ErrorCode::InvalidArgument, "pearson needs equal row counts");
  if (x.rows() < 2) fail(ErrorCode::InvalidArgument, "pearson needs at least two rows");
  const CenteredColumns cx = center(x);
  const CenteredColumns cy = center(y);
  Matrix cross(x.cols(), y.cols());
  kernels::active().cross_product(cx.centered.data(), static_cast<std::size_t>(x.rows()),
                                  static_cast<std::size_t>(x.cols()), cy.centered.data(),
                                  static_cast<std::size_t>(y.cols()), cross.data());
  const double n = static_cast<double>(x.rows());
  CorrelationMatrix out{Matrix::Zero(x.cols(), y.cols()), cx.constant, cy.constant};
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      if (out.masked(i, j)) continue;
      const double r = cross(i, j) / n / std::sqrt(cx.variance[i] * cy.variance[j]);
      out.c(i, j) = std::clamp(r, -1.0, 1.0);
    }
  }
  return out;
}

std::vector<int> max_weight_assignment(const Matrix& weights) {
  const auto n = static_cast<int>(weights.rows());
  if (weights.cols() != n) fail(ErrorCode::InvalidArgument, "assignment needs a square matrix");
  if (n == 0) return {};
  // Shortest augmenting path formulation on cost = -weight, 1-based with a
  // virtual column 0.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const int row0 = match[col0];
      double delta = kInf;
      int col1 = 0;
      for (int col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double cur = -weights(row0 - 1, col - 1) - u[row0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (int col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int col = 1; col <= n; ++col) assignment[match[col] - 1] = col - 1;
  return assignment;
}

MccResult mcc(const Matrix& corr) {
  if (corr.rows() != corr.cols()) fail(ErrorCode::InvalidArgument, "mcc needs a square correlation matrix");
  const Matrix weights = corr.cwiseAbs();
  MccResult out;
  out.assignment = max_weight_assignment(weights);
  double acc = 0.0;
  for (std::size_t j = 0; j < out.assignment.size(); ++j) {
    const double w = weights(static_cast<Eigen::Index>(j), out.assignment[j]);
    out.pair_abs.push_back(w);
    acc += w;
  }
  out.score = out.assignment.empty() ? 0.0 : acc / static_cast<double>(out.assignment.size());
  return out;
}

MccResult mcc(const CorrelationMatrix& corr) { return mcc(corr.c); }

double mcc_score(const Matrix& latents, const Matrix& learned) { return mcc(pearson(latents, learned)).score; }

std::string DisentanglementReport::describe() const {
  std::ostringstream os;
  os << (passed ? "disentangled" : "entangled") << " (threshold " << threshold << ", " << single_entry_columns
     << " single-entry columns, rows " << (rows_covered ? "covered" : "not covered") << ")";
  if (!violating_columns.empty()) {
    os << "; columns with several entries:";
    for (int c : violating_columns) os << ' ' << c;
  }
  return os.str();
}

DisentanglementReport disentanglement_check(const Matrix& effective, double tol) {
  if (!effective.allFinite()) fail(ErrorCode::InvalidArgument, "effective matrix must be finite");
  DisentanglementReport r;
  const double peak = effective.cwiseAbs().maxCoeff();
  r.threshold = tol * peak;
  std::vector<bool> row_hit(static_cast<std::size_t>(effective.rows()), false);
  for (Eigen::Index c = 0; c < effective.cols(); ++c) {
    int survivors = 0;
    for (Eigen::Index i = 0; i < effective.rows(); ++i) {
      if (std::abs(effective(i, c)) > r.threshold) {
        ++survivors;
        row_hit[static_cast<std::size_t>(i)] = true;
      }
    }
    r.survivors_per_column.push_back(survivors);
    if (survivors > 1) r.violating_columns.push_back(static_cast<int>(c));
    if (survivors == 1) ++r.single_entry_columns;
  }
  r.rows_covered = peak > 0.0;
  for (bool hit : row_hit) r.rows_covered = r.rows_covered && hit;
  r.passed = r.violating_columns.empty() && r.single_entry_columns >= effective.rows() && r.rows_covered;
  return r;
}

}  // namespace varsparse
