#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "lotsub/numerics.hpp"

using namespace lotsub;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> nd;
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = nd(rng);
  return m;
}

// Orthonormal columns by classical Gram-Schmidt, done twice for stability.
Matrix gram_schmidt(Matrix a) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      for (Eigen::Index k = 0; k < j; ++k) a.col(j) -= a.col(k).dot(a.col(j)) * a.col(k);
      a.col(j).normalize();
    }
  }
  return a;
}

}  // namespace

TEST_CASE("svd of the identity") {
  const SvdResult r = svd(Matrix::Identity(3, 3));
  REQUIRE(r.singular_values.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(r.singular_values(i) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("svd of a rank-1 outer product") {
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(4, 1.0);            // |u| = 2
  const Eigen::VectorXd v = Eigen::VectorXd::Constant(3, std::sqrt(3.0));  // |v| = 3
  const SvdResult r = svd(u * v.transpose());
  CHECK(r.singular_values(0) == doctest::Approx(6.0).epsilon(1e-13));
  for (Eigen::Index i = 1; i < r.singular_values.size(); ++i) CHECK(r.singular_values(i) < 1e-13);
  CHECK(r.numerical_rank(4, 3) == 1);
}

TEST_CASE("svd accuracy contract on random matrices") {
  std::mt19937_64 rng(4);
  for (auto [rows, cols] : {std::pair{10, 6}, std::pair{6, 10}, std::pair{40, 12}, std::pair{1, 1}}) {
    const Matrix a = random_matrix(rng, rows, cols);
    const SvdResult r = svd(a);
    const Matrix recon = r.left_vectors * r.singular_values.asDiagonal() * r.right_vectors.transpose();
    CHECK((a - recon).norm() <= 1e-10 * std::max(1.0, a.norm()));
    CHECK(orthonormality_defect(r.left_vectors) <= 1e-10);
    CHECK(orthonormality_defect(r.right_vectors) <= 1e-10);
    for (Eigen::Index i = 0; i < r.singular_values.size(); ++i) {
      CHECK(r.singular_values(i) >= 0.0);
      if (i > 0) CHECK(r.singular_values(i) <= r.singular_values(i - 1));
    }
  }
}

TEST_CASE("svd rejects non-finite input") {
  Matrix a = Matrix::Ones(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(kind_of([&] { svd(a); }) == ErrorKind::NonFiniteCoordinate);
}

TEST_CASE("project_residual examples") {
  std::mt19937_64 rng(5);
  const Matrix b = gram_schmidt(random_matrix(rng, 12, 4));

  // A basis column lies in the span.
  CHECK(project_residual(b.col(0), b) <= 1e-12);

  // Something orthogonal to the span keeps its full norm.
  Matrix ext = random_matrix(rng, 12, 5);
  ext.leftCols(4) = b;
  const Matrix q = gram_schmidt(ext);
  const FlatVector orth = 3.0 * q.col(4);
  CHECK(project_residual(orth, b) == doctest::Approx(orth.squaredNorm()).epsilon(1e-12));

  // x = B c + r with r orthogonal to the span -> |r|^2.
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd c = random_matrix(rng, 4, 1);
    Matrix e = random_matrix(rng, 12, 5);
    e.leftCols(4) = b;
    const Eigen::VectorXd r = gram_schmidt(e).col(4) * (0.1 + t);
    const FlatVector x = b * c + r;
    CHECK(project_residual(x, b) == doctest::Approx(r.squaredNorm()).epsilon(1e-9));
  }
}

TEST_CASE("project_residual idempotence and bound") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    const Matrix b = gram_schmidt(random_matrix(rng, 15, 1 + t % 6));
    const FlatVector x = random_matrix(rng, 15, 1);
    const double res = project_residual(x, b);
    const FlatVector rvec = x - b * (b.transpose() * x);
    CHECK(std::abs(project_residual(rvec, b) - res) <= 1e-9 * std::max(1.0, res));
    CHECK(res <= x.squaredNorm());
  }
}

TEST_CASE("project_residual errors") {
  const Matrix b = Matrix::Identity(4, 2);
  CHECK(kind_of([&] { project_residual(FlatVector::Ones(3), b); }) == ErrorKind::ShapeMismatch);
  Matrix skew = b;
  skew(0, 1) = 0.1;
  CHECK(kind_of([&] { project_residual(FlatVector::Ones(4), skew); }) == ErrorKind::NonOrthonormalBasis);
  Matrix slightly = b;
  slightly(3, 1) = 1e-10;  // within the 1e-8 orthonormality tolerance
  CHECK_NOTHROW(project_residual(FlatVector::Ones(4), slightly));
}

TEST_CASE("rank tolerance follows the eps * sigma1 * max(rows, cols) convention") {
  Eigen::VectorXd s(3);
  s << 2.0, 1.0, 0.0;
  CHECK(rank_tolerance(s, 5, 3) == doctest::Approx(std::numeric_limits<double>::epsilon() * 2.0 * 5));
}
