#include "lotsub/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lotsub/subspace.hpp"

namespace lotsub {
namespace {

// Summing in sorted order makes the result independent of point storage order.
double canonical_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

double signed_pow(double x, double p) {
  if (x == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(x), p), x);
}

std::vector<double> column_values(const PointSet& p, Eigen::Index d) {
  std::vector<double> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = p.points()(static_cast<Eigen::Index>(i), d);
  return v;
}

Matrix design_matrix(const std::vector<FlatVector>& xs, const Eigen::VectorXd& mean, const Eigen::VectorXd& scale) {
  const auto d = mean.size();
  Matrix design(static_cast<Eigen::Index>(xs.size()), d + 1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    design.row(row).head(d) = ((xs[i] - mean).array() / scale.array()).matrix().transpose();
    design(row, d) = 1.0;
  }
  return design;
}

}  // namespace

SetEmbedding gem_embed(const PointSet& p, double power) {
  if (!(power >= 1.0)) throw Error(ErrorKind::InvalidArgument, "GeM power must be >= 1");
  const auto l = static_cast<Eigen::Index>(p.dim());
  SetEmbedding out{SetEmbeddingKind::Gem, FlatVector(l)};
  for (Eigen::Index d = 0; d < l; ++d) {
    std::vector<double> terms = column_values(p, d);
    for (double& t : terms) t = power == 1.0 ? t : signed_pow(t, power);
    const double mu = canonical_sum(terms) / static_cast<double>(p.size());
    out.vector(d) = power == 1.0 ? mu : signed_pow(mu, 1.0 / power);
  }
  return out;
}

SetEmbedding cov_embed(const PointSet& p) {
  if (p.size() < 2) throw Error(ErrorKind::TooFewPoints, "covariance pooling needs at least two points");
  const auto l = static_cast<Eigen::Index>(p.dim());
  const double n = static_cast<double>(p.size());
  SetEmbedding out{SetEmbeddingKind::CovPool, FlatVector(l + l * (l + 1) / 2)};
  Eigen::VectorXd mean(l);
  for (Eigen::Index d = 0; d < l; ++d) {
    std::vector<double> terms = column_values(p, d);
    mean(d) = canonical_sum(terms) / n;
    out.vector(d) = mean(d);
  }
  Eigen::Index slot = l;
  std::vector<double> terms(p.size());
  for (Eigen::Index a = 0; a < l; ++a) {
    for (Eigen::Index b = a; b < l; ++b) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        terms[i] = (p.points()(row, a) - mean(a)) * (p.points()(row, b) - mean(b));
      }
      out.vector(slot++) = canonical_sum(terms) / (n - 1.0);
    }
  }
  return out;
}

SetEmbedding fsort_embed(const PointSet& p, std::size_t k) {
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "sort pooling needs k >= 2");
  const auto l = static_cast<Eigen::Index>(p.dim());
  const std::size_t n = p.size();
  SetEmbedding out{SetEmbeddingKind::FSort, FlatVector(l * static_cast<Eigen::Index>(k))};
  for (Eigen::Index d = 0; d < l; ++d) {
    std::vector<double> v = column_values(p, d);
    std::sort(v.begin(), v.end(), std::greater<>());
    for (std::size_t m = 0; m < k; ++m) {
      // Position m / (k - 1) along the sorted sequence, in exact integer arithmetic.
      const std::size_t num = m * (n - 1);
      const std::size_t lo = num / (k - 1);
      const double frac = static_cast<double>(num % (k - 1)) / static_cast<double>(k - 1);
      const std::size_t hi = std::min(lo + 1, n - 1);
      out.vector(d * static_cast<Eigen::Index>(k) + static_cast<Eigen::Index>(m)) =
          frac == 0.0 ? v[lo] : (1.0 - frac) * v[lo] + frac * v[hi];
    }
  }
  return out;
}

double linear_objective(const Matrix& weights, const Matrix& design, const std::vector<int>& labels, double l2,
                        Matrix* gradient) {
  const auto n = design.rows();
  const auto d = design.cols() - 1;
  const Matrix logits = design * weights.transpose();  // n x K
  Matrix probs(logits.rows(), logits.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double shift = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - shift).exp().matrix();
    const double z = e.sum();
    probs.row(i) = e / z;
    loss -= logits(i, labels[static_cast<std::size_t>(i)]) - shift - std::log(z);
  }
  loss /= static_cast<double>(n);
  loss += 0.5 * l2 * weights.leftCols(d).squaredNorm();
  if (gradient != nullptr) {
    for (Eigen::Index i = 0; i < n; ++i) probs(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    *gradient = probs.transpose() * design / static_cast<double>(n);
    gradient->leftCols(d) += l2 * weights.leftCols(d);
  }
  return loss;
}

LinearClassifier fit_linear(const std::vector<FlatVector>& embeddings, const std::vector<int>& labels,
                            int num_classes, const LinearHyper& hyper) {
  if (embeddings.empty() || embeddings.size() != labels.size()) {
    throw Error(ErrorKind::InvalidArgument, "need one label per embedding and at least one sample");
  }
  if (num_classes < 1) throw Error(ErrorKind::InvalidArgument, "need at least one class");
  const auto d = embeddings.front().size();
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (embeddings[i].size() != d) throw Error(ErrorKind::ShapeMismatch, "embedding lengths differ");
    if (!embeddings[i].allFinite()) throw Error(ErrorKind::DegenerateInput, "non-finite embedding");
    if (labels[i] < 0 || labels[i] >= num_classes) throw Error(ErrorKind::LabelGap, "label outside 0..K-1");
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  for (int k = 0; k < num_classes; ++k) {
    if (counts[static_cast<std::size_t>(k)] == 0) throw Error(ErrorKind::EmptyClass, "class " + std::to_string(k) + " has no samples");
  }

  LinearClassifier clf;
  clf.hyper = hyper;
  const double n = static_cast<double>(embeddings.size());
  clf.feature_mean = Eigen::VectorXd::Zero(d);
  for (const auto& x : embeddings) clf.feature_mean += x;
  clf.feature_mean /= n;
  clf.feature_scale = Eigen::VectorXd::Zero(d);
  for (const auto& x : embeddings) clf.feature_scale += (x - clf.feature_mean).cwiseAbs2();
  clf.feature_scale = (clf.feature_scale / n).cwiseSqrt();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(clf.feature_scale(j) > 1e-12)) clf.feature_scale(j) = 1.0;
  }

  const Matrix design = design_matrix(embeddings, clf.feature_mean, clf.feature_scale);
  clf.weights = Matrix::Zero(num_classes, d + 1);
  Matrix grad;
  double loss = linear_objective(clf.weights, design, labels, hyper.l2, &grad);
  clf.loss_history.push_back(loss);
  double step = hyper.learning_rate;
  for (int it = 0; it < hyper.iterations; ++it) {
    const Matrix candidate = clf.weights - step * grad;
    Matrix candidate_grad;
    const double candidate_loss = linear_objective(candidate, design, labels, hyper.l2, &candidate_grad);
    if (candidate_loss <= loss) {
      clf.weights = candidate;
      grad = std::move(candidate_grad);
      loss = candidate_loss;
      clf.loss_history.push_back(loss);
      step *= 1.2;
    } else {
      step *= 0.5;
    }
  }
  return clf;
}

int predict_linear(const LinearClassifier& clf, const FlatVector& x) {
  if (x.size() != clf.feature_mean.size()) throw Error(ErrorKind::ShapeMismatch, "embedding length differs from training");
  Eigen::VectorXd z(x.size() + 1);
  z.head(x.size()) = (x - clf.feature_mean).array() / clf.feature_scale.array();
  z(x.size()) = 1.0;
  const Eigen::VectorXd logits = clf.weights * z;
  std::vector<double> neg(static_cast<std::size_t>(logits.size()));
  for (Eigen::Index k = 0; k < logits.size(); ++k) neg[static_cast<std::size_t>(k)] = -logits(k);
  return argmin_label(neg);
}

NsClassifier ns_on_embeddings(const std::vector<FlatVector>& embeddings, const std::vector<int>& labels,
                              int num_classes, double variance_fraction) {
  if (embeddings.empty() || embeddings.size() != labels.size()) {
    throw Error(ErrorKind::InvalidArgument, "need one label per embedding and at least one sample");
  }
  NsClassifier clf;
  const auto d = embeddings.front().size();
  for (int k = 0; k < num_classes; ++k) {
    std::vector<const FlatVector*> members;
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
      if (labels[i] == k) members.push_back(&embeddings[i]);
    }
    if (members.empty()) throw Error(ErrorKind::EmptyClass, "class " + std::to_string(k) + " has no samples");
    Matrix a(d, static_cast<Eigen::Index>(members.size()));
    for (std::size_t c = 0; c < members.size(); ++c) {
      if (members[c]->size() != d) throw Error(ErrorKind::ShapeMismatch, "embedding lengths differ");
      a.col(static_cast<Eigen::Index>(c)) = *members[c];
    }
    clf.bases.push_back(fit_basis(a, variance_fraction).basis);
  }
  return clf;
}

int predict_ns(const NsClassifier& clf, const FlatVector& x, std::vector<double>* scores) {
  std::vector<double> s;
  s.reserve(clf.bases.size());
  for (const auto& b : clf.bases) s.push_back(project_residual(x, b));
  const int label = argmin_label(s);
  if (scores != nullptr) *scores = std::move(s);
  return label;
}

}  // namespace lotsub
