#include "lotsub/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

namespace lotsub {

double rank_tolerance(const Eigen::VectorXd& singular_values, Eigen::Index rows, Eigen::Index cols) {
  if (singular_values.size() == 0) return 0.0;
  return std::numeric_limits<double>::epsilon() * singular_values(0) *
         static_cast<double>(std::max(rows, cols));
}

Eigen::Index SvdResult::numerical_rank(Eigen::Index rows, Eigen::Index cols) const {
  const double tol = rank_tolerance(singular_values, rows, cols);
  Eigen::Index r = 0;
  while (r < singular_values.size() && singular_values(r) > tol) ++r;
  return r;
}

SvdResult svd(const Matrix& a) {
  if (!a.allFinite()) throw Error(ErrorKind::NonFiniteCoordinate, "svd input has non-finite entries");
  if (a.size() == 0) throw Error(ErrorKind::ShapeMismatch, "svd input is empty");

  Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    throw Error(ErrorKind::ConvergenceFailure, "bidiagonal divide-and-conquer SVD did not converge");
  }
  SvdResult out{dec.matrixU(), dec.singularValues(), dec.matrixV()};

  const double scale = std::max(1.0, a.norm());
  const Matrix recon = out.left_vectors * out.singular_values.asDiagonal() * out.right_vectors.transpose();
  if (!((a - recon).norm() <= 1e-10 * scale) || orthonormality_defect(out.left_vectors) > 1e-10 ||
      orthonormality_defect(out.right_vectors) > 1e-10) {
    throw Error(ErrorKind::ConvergenceFailure, "SVD result misses its accuracy contract");
  }
  return out;
}

double orthonormality_defect(const Matrix& basis) {
  if (basis.cols() == 0) return 0.0;
  const Matrix gram = basis.transpose() * basis;
  return (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
}

double project_residual_unchecked(const FlatVector& x, const Matrix& basis) {
  if (basis.cols() == 0) return x.squaredNorm();
  const Eigen::VectorXd coeffs = basis.transpose() * x;
  const double r = (x - basis * coeffs).squaredNorm();
  return r;
}

double project_residual(const FlatVector& x, const Matrix& basis) {
  if (basis.rows() != x.size()) {
    throw Error(ErrorKind::ShapeMismatch, "basis has " + std::to_string(basis.rows()) +
                                              " rows, vector has length " + std::to_string(x.size()));
  }
  if (orthonormality_defect(basis) > 1e-8) {
    throw Error(ErrorKind::NonOrthonormalBasis, "basis columns are not orthonormal to 1e-8");
  }
  return project_residual_unchecked(x, basis);
}

}  // namespace lotsub
