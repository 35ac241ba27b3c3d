#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <random>

#include "lotsub/ot.hpp"
#include "lotsub/pointset.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace lotsub;

TEST_CASE("validate accepts finite sets and rejects bad ones") {
  RowMatrix ok(3, 2);
  ok << 0, 0, 1, 0, 0, 1;
  CHECK_NOTHROW(validate(ok));

  RowMatrix nan = ok;
  nan(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(kind_of([&] { validate(nan); }) == ErrorKind::NonFiniteCoordinate);
  RowMatrix inf = ok;
  inf(0, 0) = std::numeric_limits<double>::infinity();
  CHECK(kind_of([&] { PointSet{inf}; }) == ErrorKind::NonFiniteCoordinate);

  CHECK(kind_of([] { validate(RowMatrix(0, 2)); }) == ErrorKind::EmptyPointSet);
  CHECK(kind_of([] { validate(RowMatrix(3, 0)); }) == ErrorKind::DimensionZero);

  RowMatrix huge = ok;
  huge(2, 0) = 1e101;
  CHECK(kind_of([&] { validate(huge); }) == ErrorKind::CoordinateOverflow);
}

TEST_CASE("flatten is point-major") {
  RowMatrix m(2, 2);
  m << 1, 2, 3, 4;
  const FlatVector v = flatten(m);
  REQUIRE(v.size() == 4);
  CHECK(v(0) == 1);
  CHECK(v(1) == 2);
  CHECK(v(2) == 3);
  CHECK(v(3) == 4);

  const FlatVector z = flatten(RowMatrix::Zero(1, 2));
  CHECK(z.size() == 2);
  CHECK(z.isZero());
}

TEST_CASE("flatten/unflatten round trip for all shapes up to 64") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (std::size_t n = 1; n <= 64; n += 7) {
    for (std::size_t l = 1; l <= 64; l += 9) {
      RowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l));
      for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = nd(rng);
      const FlatVector v = flatten(m);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < l; ++d) {
          REQUIRE(v(static_cast<Eigen::Index>(i * l + d)) == m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)));
        }
      }
      CHECK(unflatten(v, n, l) == m);
    }
  }
  CHECK(kind_of([] { unflatten(FlatVector::Zero(5), 2, 2); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("permute_points") {
  RowMatrix m(2, 2);
  m << 1, 2, 3, 4;
  const PointSet p(m);
  const std::vector<std::size_t> id = {0, 1};
  CHECK(permute_points(p, id) == p);

  const std::vector<std::size_t> swap = {1, 0};
  const PointSet q = permute_points(p, swap);
  CHECK(q.points()(0, 0) == 3);
  CHECK(q.points()(1, 1) == 2);

  const std::vector<std::size_t> bad = {0, 0};
  CHECK(kind_of([&] { permute_points(p, bad); }) == ErrorKind::InvalidPermutation);
  const std::vector<std::size_t> short_perm = {0};
  CHECK(kind_of([&] { permute_points(p, short_perm); }) == ErrorKind::InvalidPermutation);
}

TEST_CASE("permute_points preserves the multiset and downstream W2") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const PointSet s = oracle::random_pointset(rng, 6, 3);
    const PointSet r = oracle::random_pointset(rng, 6, 3);
    const auto perm = oracle::random_permutation(rng, 6);
    const PointSet q = permute_points(s, perm);
    CHECK(oracle::sorted_rows(q.points()) == oracle::sorted_rows(s.points()));
    CHECK(wasserstein2(q, r) == wasserstein2(s, r));
  }
}

TEST_CASE("LabeledDataset checks") {
  RowMatrix a(2, 2);
  a << 0, 0, 1, 1;
  LabeledDataset ds;
  ds.num_classes = 2;
  ds.samples.push_back({PointSet(a), 0});
  ds.samples.push_back({PointSet(a), 1});
  ds.samples.push_back({PointSet(a), 0});
  CHECK_NOTHROW(ds.check());
  CHECK(ds.indices_of(0) == std::vector<std::size_t>{0, 2});
  CHECK(ds.common_size() == 2);

  LabeledDataset gap = ds;
  gap.num_classes = 3;
  CHECK(kind_of([&] { gap.check(); }) == ErrorKind::EmptyClass);
  CHECK_NOTHROW(gap.check(false));

  LabeledDataset out_of_range = ds;
  out_of_range.samples[0].label = 5;
  CHECK(kind_of([&] { out_of_range.check(); }) == ErrorKind::LabelGap);

  LabeledDataset mixed = ds;
  mixed.samples.push_back({PointSet(RowMatrix::Zero(2, 3)), 1});
  CHECK(kind_of([&] { mixed.check(); }) == ErrorKind::DimensionMismatch);

  LabeledDataset ragged = ds;
  ragged.samples.push_back({PointSet(RowMatrix::Zero(3, 2)), 1});
  CHECK(ragged.common_size() == 0);
}
