#pragma once

#include <cstdint>
#include <vector>

#include "lotsub/pointset.hpp"

namespace lotsub {

/// Squared Euclidean transport costs; entry (i, j) = |s(i) - r(j)|^2 for
/// source point i and reference point j.
struct CostMatrix {
  RowMatrix entries;

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
};

/// Optimal matching of source points onto reference points.
struct Assignment {
  /// perm[j] = i means source point i is matched to reference point j.
  std::vector<std::size_t> perm;
  /// Mean matched squared distance (1/N) * sum_j cost(perm[j], j), i.e. W2^2.
  double total_cost = 0.0;
};

/// Source points reordered into reference order: row j = s(perm[j]).
struct LotEmbedding {
  RowMatrix matrix;
  std::uint64_t reference_id = 0;

  std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(matrix.cols()); }
  FlatVector flat() const { return flatten(matrix); }
};

/// Content hash identifying a reference point set (FNV-1a over the raw coordinates).
std::uint64_t pointset_id(const PointSet& p);

CostMatrix cost_matrix(const PointSet& s, const PointSet& r);

/// Exact linear assignment by Jonker-Volgenant shortest augmenting paths
/// (column reduction, reduction transfer, augmenting row reduction, Dijkstra
/// augmentation). Reference indices play the role of LAP rows and are
/// processed in ascending order, so the output is deterministic.
Assignment solve_lap(const CostMatrix& c);

/// Squared Wasserstein-2 distance between the uniform measures on s and r.
double wasserstein2(const PointSet& s, const PointSet& r);

LotEmbedding lot_transform(const PointSet& s, const PointSet& r);

/// sqrt((1/N) * sum_j |a_j - b_j|^2) between embeddings against the same reference.
double lot_distance(const LotEmbedding& a, const LotEmbedding& b);

}  // namespace lotsub
