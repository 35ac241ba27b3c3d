#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lotsub/error.hpp"

namespace lotsub {

/// Row-major dense matrix; one point (or sample) per row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Point-major flattening of an N x L matrix: entry i*L + d holds point i, coordinate d.
using FlatVector = Eigen::VectorXd;

/// Coordinates with magnitude above this are rejected so squared costs stay finite.
inline constexpr double kMaxCoordinateMagnitude = 1e100;

/// An ordered set of N points in R^L with uniform mass 1/N.
///
/// Storage order is significant only for storage; every transport-derived
/// quantity is invariant to it. Construction validates, so a PointSet in
/// hand always satisfies N >= 1, L >= 1 and finite coordinates.
class PointSet {
 public:
  explicit PointSet(RowMatrix points);

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }

  const RowMatrix& points() const { return points_; }
  Eigen::RowVectorXd point(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)); }

  bool operator==(const PointSet& other) const;

 private:
  RowMatrix points_;
};

/// Throws Error{EmptyPointSet | DimensionZero | NonFiniteCoordinate | CoordinateOverflow}.
void validate(const RowMatrix& points);
inline void validate(const PointSet& p) { validate(p.points()); }

FlatVector flatten(const RowMatrix& m);
RowMatrix unflatten(const FlatVector& v, std::size_t n, std::size_t l);

/// Row i of the result is row perm[i] of p. perm must be a bijection on 0..N-1.
PointSet permute_points(const PointSet& p, std::span<const std::size_t> perm);

bool is_permutation(std::span<const std::size_t> perm, std::size_t n);

struct LabeledSample {
  PointSet points;
  int label;
};

/// Samples with class labels in 0..K-1.
struct LabeledDataset {
  std::vector<LabeledSample> samples;
  int num_classes = 0;

  std::size_t size() const { return samples.size(); }
  /// Indices of samples carrying `label`, in dataset order.
  std::vector<std::size_t> indices_of(int label) const;
  /// Throws on mixed dimensions, labels outside 0..K-1, or classes with no sample.
  void check(bool require_all_classes = true) const;
  /// Common N when every sample has the same cardinality, 0 otherwise.
  std::size_t common_size() const;
};

}  // namespace lotsub
