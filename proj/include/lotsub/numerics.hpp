#pragma once

#include <Eigen/Dense>

#include "lotsub/pointset.hpp"

namespace lotsub {

using Matrix = Eigen::MatrixXd;

/// Thin SVD a = U * diag(S) * V^T with S sorted non-increasing.
struct SvdResult {
  Matrix left_vectors;
  Eigen::VectorXd singular_values;
  Matrix right_vectors;

  /// Number of singular values above eps * sigma_1 * max(rows, cols).
  Eigen::Index numerical_rank(Eigen::Index rows, Eigen::Index cols) const;
};

/// Throws Error{NonFiniteCoordinate} for non-finite input and
/// Error{ConvergenceFailure} when the result misses its accuracy contract.
SvdResult svd(const Matrix& a);

/// Tolerance under which a singular value counts as zero for rank decisions.
double rank_tolerance(const Eigen::VectorXd& singular_values, Eigen::Index rows, Eigen::Index cols);

/// Squared norm of x - B B^T x. B must be column-orthonormal (checked to 1e-8).
double project_residual(const FlatVector& x, const Matrix& basis);

/// Same as project_residual without the orthonormality check; for hot loops on
/// bases that were checked once at construction.
double project_residual_unchecked(const FlatVector& x, const Matrix& basis);

/// max |B^T B - I|.
double orthonormality_defect(const Matrix& basis);

}  // namespace lotsub
