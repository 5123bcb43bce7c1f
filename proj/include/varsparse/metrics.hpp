#pragma once

// Disentanglement metrics: Pearson correlations between ground-truth and
// learned variables, the mean correlation coefficient under the best
// one-to-one matching, and a structural check on the effective map L * Lhat.

#include "varsparse/matrix.hpp"

#include <string>
#include <vector>

namespace varsparse {

/// Relative threshold below which a sample variance counts as zero:
/// var <= kZeroVariance * mean(x^2).
inline constexpr double kZeroVariance = 1e-8;

bool effectively_constant(double variance, double mean_square) noexcept;

struct CorrelationMatrix {
  Matrix c;                      ///< c(i, j) = corr(x_i, y_j); 0 where masked
  std::vector<bool> x_constant;  ///< columns of x with (numerically) zero variance
  std::vector<bool> y_constant;

  bool masked(Eigen::Index i, Eigen::Index j) const { return x_constant[i] || y_constant[j]; }
};

/// Pearson correlation between the columns of x and y (n >= 2 rows each).
CorrelationMatrix pearson(const Matrix& x, const Matrix& y);

struct MccResult {
  double score = 0.0;
  std::vector<int> assignment;   ///< x column j is matched to y column assignment[j]
  std::vector<double> pair_abs;  ///< |c(j, assignment[j])|
};

/// Maximum-weight perfect matching (Hungarian algorithm, O(n^3)).
std::vector<int> max_weight_assignment(const Matrix& weights);

/// Mean |correlation| under the optimal permutation; masked entries count as 0.
MccResult mcc(const CorrelationMatrix& corr);
MccResult mcc(const Matrix& corr);

/// MCC between ground-truth latents and a learned representation.
double mcc_score(const Matrix& latents, const Matrix& learned);

struct DisentanglementReport {
  bool passed = false;
  double threshold = 0.0;
  std::vector<int> survivors_per_column;
  std::vector<int> violating_columns;  ///< columns with more than one surviving entry
  int single_entry_columns = 0;
  bool rows_covered = false;

  std::string describe() const;
};

/// Entries with |x| <= tol * max|x| are treated as zero. Passes when every
/// column keeps at most one entry, at least d columns keep exactly one, and
/// every row is hit, i.e. the matrix has the D * P shape up to redundancies.
DisentanglementReport disentanglement_check(const Matrix& effective, double tol = 1e-2);

}  // namespace varsparse
