#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "lotsub/baselines.hpp"
#include "oracles.hpp"

using namespace lotsub;

namespace {

PointSet column(std::initializer_list<double> values) {
  RowMatrix m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return PointSet(m);
}

}  // namespace

TEST_CASE("gem_embed") {
  std::mt19937_64 rng(1);
  const PointSet p = oracle::random_pointset(rng, 17, 3);
  const SetEmbedding g1 = gem_embed(p, 1.0);
  CHECK(g1.kind == SetEmbeddingKind::Gem);
  REQUIRE(g1.vector.size() == 3);
  // p = 1 is the centroid exactly (summed in sorted order, so compare with a tolerance).
  const Eigen::RowVectorXd centroid = p.points().colwise().mean();
  for (Eigen::Index d = 0; d < 3; ++d) CHECK(g1.vector(d) == doctest::Approx(centroid(d)).epsilon(1e-15));

  RowMatrix same(5, 2);
  same.rowwise() = Eigen::RowVector2d(-0.7, 2.5);
  for (double power : {1.0, 2.0, 4.0}) {
    const FlatVector v = gem_embed(PointSet(same), power).vector;
    CHECK(v(0) == doctest::Approx(-0.7).epsilon(1e-14));
    CHECK(v(1) == doctest::Approx(2.5).epsilon(1e-14));
  }
  CHECK(gem_embed(column({-1.0, 1.0}), 2.0).vector(0) == 0.0);
  // mu = (8 + 1) / 2 for p = 3 on {2, 1}: m = 4.5^(1/3).
  CHECK(gem_embed(column({2.0, 1.0}), 3.0).vector(0) == doctest::Approx(std::cbrt(4.5)).epsilon(1e-14));
  CHECK(kind_of([&] { gem_embed(p, 0.5); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("cov_embed") {
  std::mt19937_64 rng(2);
  const PointSet cloud = oracle::random_pointset(rng, 20000, 2);
  const FlatVector c = cov_embed(cloud).vector;
  REQUIRE(c.size() == 2 + 3);
  CHECK(c(2) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(c(3)) < 0.05);
  CHECK(c(4) == doctest::Approx(1.0).epsilon(0.05));

  RowMatrix twice(2, 3);
  twice.rowwise() = Eigen::RowVector3d(1, 2, 3);
  const FlatVector z = cov_embed(PointSet(twice)).vector;
  CHECK(z.size() == 3 + 6);
  CHECK(z.tail(6).isZero(0.0));

  // Exact values on a small set: x = (0, 2, 4), y = (1, 1, 4).
  RowMatrix small(3, 2);
  small << 0, 1, 2, 1, 4, 4;
  const FlatVector s = cov_embed(PointSet(small)).vector;
  CHECK(s(0) == doctest::Approx(2.0));
  CHECK(s(1) == doctest::Approx(2.0));
  CHECK(s(2) == doctest::Approx(4.0));  // var x
  CHECK(s(3) == doctest::Approx(3.0));  // cov xy
  CHECK(s(4) == doctest::Approx(3.0));  // var y

  const PointSet p = oracle::random_pointset(rng, 30, 3);
  RowMatrix shifted = p.points();
  shifted.rowwise() += Eigen::RowVector3d(5, -1, 2);
  const FlatVector a = cov_embed(p).vector, b = cov_embed(PointSet(shifted)).vector;
  CHECK((b.head(3) - a.head(3) - Eigen::Vector3d(5, -1, 2)).norm() <= 1e-12);
  CHECK((b.tail(6) - a.tail(6)).norm() <= 1e-12);

  CHECK(kind_of([] { cov_embed(column({1.0})); }) == ErrorKind::TooFewPoints);
}

TEST_CASE("fsort_embed") {
  const FlatVector v = fsort_embed(column({0.0, 10.0}), 3).vector;
  REQUIRE(v.size() == 3);
  CHECK(v(0) == 10.0);
  CHECK(v(1) == 5.0);
  CHECK(v(2) == 0.0);

  const FlatVector sorted = fsort_embed(column({4.0, 3.0, 1.0, -2.0}), 4).vector;
  CHECK(sorted == (FlatVector(4) << 4.0, 3.0, 1.0, -2.0).finished());

  std::mt19937_64 rng(3);
  const PointSet p = oracle::random_pointset(rng, 25, 2);
  const FlatVector e = fsort_embed(p, 16).vector;
  CHECK(e.size() == 32);
  for (Eigen::Index k = 1; k < 16; ++k) {
    CHECK(e(k) <= e(k - 1));
    CHECK(e(16 + k) <= e(16 + k - 1));
  }

  // Monotone: increasing every value of coordinate 0 never decreases its block.
  RowMatrix up = p.points();
  std::uniform_real_distribution<double> inc(0.0, 1.0);
  for (Eigen::Index i = 0; i < up.rows(); ++i) up(i, 0) += inc(rng);
  const FlatVector f = fsort_embed(PointSet(up), 16).vector;
  for (Eigen::Index k = 0; k < 16; ++k) CHECK(f(k) >= e(k));
  CHECK(f.tail(16) == e.tail(16));

  CHECK(kind_of([&] { fsort_embed(p, 1); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("embeddings are bitwise permutation invariant") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const PointSet p = oracle::random_pointset(rng, 50, 3, 2.0);
    const PointSet q = permute_points(p, oracle::random_permutation(rng, 50));
    for (double power : {1.0, 2.0, 4.0}) CHECK(gem_embed(p, power).vector == gem_embed(q, power).vector);
    CHECK(cov_embed(p).vector == cov_embed(q).vector);
    CHECK(fsort_embed(p, 16).vector == fsort_embed(q, 16).vector);
  }
}

TEST_CASE("linear_objective gradient matches central differences") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 10; ++t) {
    const int k = 2 + t % 3, d = 3 + t % 4, n = 12;
    Matrix design(n, d + 1), w(k, d + 1);
    for (Eigen::Index i = 0; i < design.size(); ++i) design.data()[i] = nd(rng);
    design.col(d).setOnes();
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = nd(rng);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i % k;

    Matrix grad;
    linear_objective(w, design, labels, 0.1, &grad);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      Matrix wp = w, wm = w;
      wp.data()[i] += h;
      wm.data()[i] -= h;
      const double fd = (linear_objective(wp, design, labels, 0.1, nullptr) -
                         linear_objective(wm, design, labels, 0.1, nullptr)) / (2 * h);
      CHECK(std::abs(fd - grad.data()[i]) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("fit_linear") {
  // Two separable 1-D classes.
  std::vector<FlatVector> xs;
  std::vector<int> ys;
  for (int i = 0; i < 10; ++i) {
    xs.push_back((FlatVector(1) << -1.0 - 0.1 * i).finished());
    ys.push_back(0);
    xs.push_back((FlatVector(1) << 1.0 + 0.1 * i).finished());
    ys.push_back(1);
  }
  const LinearClassifier clf = fit_linear(xs, ys, 2, LinearHyper{});
  CHECK(clf.weights.rows() == 2);
  CHECK(clf.weights.cols() == 2);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(predict_linear(clf, xs[i]) == ys[i]);
  REQUIRE(clf.loss_history.size() > 1);
  for (std::size_t i = 1; i < clf.loss_history.size(); ++i) CHECK(clf.loss_history[i] <= clf.loss_history[i - 1]);

  // Deterministic.
  CHECK(fit_linear(xs, ys, 2, LinearHyper{}).weights == clf.weights);

  // K = 1 always predicts 0; constant features are left unscaled.
  std::vector<FlatVector> flat(5, (FlatVector(2) << 3.0, -1.0).finished());
  const LinearClassifier one = fit_linear(flat, std::vector<int>(5, 0), 1, LinearHyper{});
  CHECK(predict_linear(one, (FlatVector(2) << 100.0, 7.0).finished()) == 0);
  CHECK(one.feature_scale == Eigen::Vector2d(1.0, 1.0));
}

TEST_CASE("ns_on_embeddings") {
  std::vector<FlatVector> xs = {(FlatVector(3) << 1, 0, 0).finished(), (FlatVector(3) << 0, 2, 1).finished()};
  std::vector<int> ys = {0, 1};
  const NsClassifier clf = ns_on_embeddings(xs, ys, 2, 1.0);
  REQUIRE(clf.bases.size() == 2);
  CHECK(std::abs(std::abs(clf.bases[1].col(0).dot(xs[1].normalized())) - 1.0) <= 1e-12);
  std::vector<double> scores;
  CHECK(predict_ns(clf, xs[1], &scores) == 1);
  CHECK(scores[1] <= 1e-12);
  CHECK(predict_ns(clf, xs[0]) == 0);

  // Argmin invariant under global positive rescaling.
  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd;
  std::vector<FlatVector> train, scaled;
  std::vector<int> labels;
  for (int i = 0; i < 12; ++i) {
    FlatVector v(6);
    for (Eigen::Index k = 0; k < 6; ++k) v(k) = nd(rng) + (k == i % 3 ? 3.0 : 0.0);
    train.push_back(v);
    scaled.push_back(7.5 * v);
    labels.push_back(i % 3);
  }
  const NsClassifier a = ns_on_embeddings(train, labels, 3, 0.9);
  const NsClassifier b = ns_on_embeddings(scaled, labels, 3, 0.9);
  for (int t = 0; t < 20; ++t) {
    FlatVector x(6);
    for (Eigen::Index k = 0; k < 6; ++k) x(k) = nd(rng);
    CHECK(predict_ns(a, x) == predict_ns(b, 7.5 * x));
  }
}
