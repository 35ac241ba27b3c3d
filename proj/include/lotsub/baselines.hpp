#pragma once

#include <string>
#include <vector>

#include "lotsub/numerics.hpp"
#include "lotsub/pointset.hpp"

namespace lotsub {

enum class SetEmbeddingKind { Gem, CovPool, FSort };

struct SetEmbedding {
  SetEmbeddingKind kind;
  FlatVector vector;
};

/// Sign-preserving generalized mean per coordinate:
/// m_d = sgn(mu_d) |mu_d|^(1/p), mu_d = mean_i sgn(x_id) |x_id|^p.
SetEmbedding gem_embed(const PointSet& p, double power);

/// Coordinate mean followed by the upper triangle (row by row, diagonal
/// included) of the sample covariance with divisor N - 1.
SetEmbedding cov_embed(const PointSet& p);

/// Per coordinate: values sorted descending, linearly interpolated at k
/// equispaced positions over [0, 1]; coordinate blocks concatenated.
SetEmbedding fsort_embed(const PointSet& p, std::size_t k);

struct LinearHyper {
  double learning_rate = 1.0;
  double l2 = 1e-3;
  int iterations = 300;
};

/// Multinomial logistic regression on standardized features.
struct LinearClassifier {
  Matrix weights;                 // K x (D + 1), bias in the last column
  Eigen::VectorXd feature_mean;   // D
  Eigen::VectorXd feature_scale;  // D, 1 where the feature has zero variance
  LinearHyper hyper;
  std::vector<double> loss_history;  // loss after every accepted step

  int num_classes() const { return static_cast<int>(weights.rows()); }
};

/// Mean cross-entropy plus (l2 / 2) * |W without bias|^2 on a design matrix whose
/// rows are samples with a trailing bias column of ones. Fills gradient when non-null.
double linear_objective(const Matrix& weights, const Matrix& design, const std::vector<int>& labels, double l2,
                        Matrix* gradient);

/// Gradient descent with step halving on rejected steps; the recorded loss is
/// non-increasing. Deterministic: weights start at zero.
LinearClassifier fit_linear(const std::vector<FlatVector>& embeddings, const std::vector<int>& labels,
                            int num_classes, const LinearHyper& hyper);

int predict_linear(const LinearClassifier& clf, const FlatVector& x);

/// Nearest-subspace classifier on raw (uncentred) embeddings.
struct NsClassifier {
  std::vector<Matrix> bases;
};

NsClassifier ns_on_embeddings(const std::vector<FlatVector>& embeddings, const std::vector<int>& labels,
                              int num_classes, double variance_fraction);

/// Class with the smallest squared residual; fills scores when non-null.
int predict_ns(const NsClassifier& clf, const FlatVector& x, std::vector<double>* scores = nullptr);

}  // namespace lotsub
