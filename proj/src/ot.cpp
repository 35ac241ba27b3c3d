#include "lotsub/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lotsub {
namespace {

void check_compatible(const PointSet& s, const PointSet& r) {
  if (s.dim() != r.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "dimensions " + std::to_string(s.dim()) + " and " + std::to_string(r.dim()));
  }
  if (s.size() != r.size()) {
    throw Error(ErrorKind::CardinalityMismatch,
                "cardinalities " + std::to_string(s.size()) + " and " + std::to_string(r.size()));
  }
}

constexpr std::ptrdiff_t kUnassigned = -1;

// Dense JV solver on an n x n row-major cost buffer. Returns the column
// assigned to each row.
std::vector<std::size_t> lapjv(const std::vector<double>& cost, std::size_t n) {
  using Index = std::ptrdiff_t;
  const auto c = [&](Index row, Index col) { return cost[static_cast<std::size_t>(row) * n + static_cast<std::size_t>(col)]; };
  const Index dim = static_cast<Index>(n);
  const double big = std::numeric_limits<double>::infinity();

  std::vector<Index> rowsol(n, kUnassigned), colsol(n, kUnassigned);
  std::vector<double> v(n, 0.0);
  std::vector<Index> free_rows(n), collist(n), matches(n, 0), pred(n);

  if (n == 1) return {0};

  // Column reduction, highest column first.
  for (Index j = dim - 1; j >= 0; --j) {
    double min = c(0, j);
    Index imin = 0;
    for (Index i = 1; i < dim; ++i) {
      if (c(i, j) < min) {
        min = c(i, j);
        imin = i;
      }
    }
    v[j] = min;
    if (++matches[imin] == 1) {
      rowsol[imin] = j;
      colsol[j] = imin;
    } else if (v[j] < v[rowsol[imin]]) {
      const Index j1 = rowsol[imin];
      rowsol[imin] = j;
      colsol[j] = imin;
      colsol[j1] = kUnassigned;
    } else {
      colsol[j] = kUnassigned;
    }
  }

  // Reduction transfer from rows assigned exactly once.
  Index numfree = 0;
  for (Index i = 0; i < dim; ++i) {
    if (matches[i] == 0) {
      free_rows[numfree++] = i;
    } else if (matches[i] == 1) {
      const Index j1 = rowsol[i];
      double min = big;
      for (Index j = 0; j < dim; ++j) {
        if (j != j1 && c(i, j) - v[j] < min) min = c(i, j) - v[j];
      }
      v[j1] -= min;
    }
  }

  // Augmenting row reduction, two passes. The step budget bounds the work
  // when floating-point price decrements become vanishingly small.
  const std::size_t step_budget = 4 * n;
  for (int pass = 0; pass < 2 && numfree > 0; ++pass) {
    Index k = 0;
    const Index prvnumfree = numfree;
    numfree = 0;
    std::size_t steps = 0;
    while (k < prvnumfree) {
      const Index i = free_rows[k++];
      double umin = c(i, 0) - v[0];
      double usubmin = big;
      Index j1 = 0, j2 = 0;
      for (Index j = 1; j < dim; ++j) {
        const double h = c(i, j) - v[j];
        if (h < usubmin) {
          if (h >= umin) {
            usubmin = h;
            j2 = j;
          } else {
            usubmin = umin;
            umin = h;
            j2 = j1;
            j1 = j;
          }
        }
      }
      Index i0 = colsol[j1];
      bool lowered = false;
      if (umin < usubmin) {
        const double lowered_price = v[j1] - (usubmin - umin);
        if (lowered_price < v[j1]) {
          v[j1] = lowered_price;
          lowered = true;
        }
      }
      if (!lowered && i0 != kUnassigned) {
        j1 = j2;
        i0 = colsol[j2];
      }
      rowsol[i] = j1;
      colsol[j1] = i;
      if (i0 != kUnassigned) {
        if (lowered && ++steps < step_budget) {
          free_rows[--k] = i0;
        } else {
          free_rows[numfree++] = i0;
        }
        rowsol[i0] = kUnassigned;
      }
    }
  }

  // Augmentation by Dijkstra shortest paths on reduced costs. The unscanned
  // columns are kept compacted (column, distance, predecessor) so each step
  // relaxes and selects over a shrinking contiguous range.
  std::vector<Index> todo_col(n), todo_pred(n);
  std::vector<double> todo_d(n), settled(n);
  for (Index f = 0; f < numfree; ++f) {
    const Index freerow = free_rows[f];
    Index remaining = dim;
    for (Index j = 0; j < dim; ++j) {
      todo_col[j] = j;
      todo_d[j] = big;
    }
    Index i = freerow;
    double h = 0.0;
    Index nscanned = 0;
    Index endofpath = 0;
    double dmin = 0.0;
    for (;;) {
      const double* ci = &cost[static_cast<std::size_t>(i) * n];
      dmin = big;
      Index kmin = 0;
      for (Index k = 0; k < remaining; ++k) {
        const Index j = todo_col[k];
        const double v2 = ci[j] - v[j] - h;
        if (v2 < todo_d[k]) {
          todo_d[k] = v2;
          todo_pred[k] = i;
        }
        if (todo_d[k] < dmin) {
          dmin = todo_d[k];
          kmin = k;
        }
      }
      const Index jmin = todo_col[kmin];
      pred[jmin] = todo_pred[kmin];
      if (colsol[jmin] == kUnassigned) {
        endofpath = jmin;
        break;
      }
      settled[jmin] = dmin;
      collist[nscanned++] = jmin;
      --remaining;
      todo_col[kmin] = todo_col[remaining];
      todo_d[kmin] = todo_d[remaining];
      todo_pred[kmin] = todo_pred[remaining];
      i = colsol[jmin];
      h = cost[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(jmin)] - v[jmin] - dmin;
    }

    for (Index k = 0; k < nscanned; ++k) {
      const Index j1 = collist[k];
      v[j1] += settled[j1] - dmin;
    }
    do {
      i = pred[endofpath];
      colsol[endofpath] = i;
      const Index j1 = endofpath;
      endofpath = rowsol[i];
      rowsol[i] = j1;
    } while (i != freerow);
  }

  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::size_t>(rowsol[i]);
  return out;
}

}  // namespace

std::uint64_t pointset_id(const PointSet& p) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&h](const void* data, std::size_t bytes) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < bytes; ++k) {
      h ^= b[k];
      h *= 1099511628211ULL;
    }
  };
  const std::uint64_t shape[2] = {p.size(), p.dim()};
  mix(shape, sizeof(shape));
  mix(p.points().data(), sizeof(double) * static_cast<std::size_t>(p.points().size()));
  return h;
}

CostMatrix cost_matrix(const PointSet& s, const PointSet& r) {
  check_compatible(s, r);
  const auto n = static_cast<Eigen::Index>(s.size());
  const auto l = static_cast<Eigen::Index>(s.dim());
  CostMatrix c{RowMatrix(n, n)};
  const RowMatrix& sp = s.points();
  const RowMatrix& rp = r.points();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double acc = 0.0;
      for (Eigen::Index d = 0; d < l; ++d) {
        const double diff = sp(i, d) - rp(j, d);
        acc += diff * diff;
      }
      c.entries(i, j) = acc;
    }
  }
  return c;
}

Assignment solve_lap(const CostMatrix& c) {
  const std::size_t n = c.size();
  if (n == 0 || static_cast<std::size_t>(c.entries.cols()) != n) {
    throw Error(ErrorKind::ShapeMismatch, "cost matrix must be square and non-empty");
  }
  // LAP rows are reference indices: transpose into a row-major buffer.
  std::vector<double> buffer(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      buffer[j * n + i] = c.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  Assignment out;
  out.perm = lapjv(buffer, n);
  // Summed in sorted order so the total is bitwise independent of point order.
  std::vector<double> matched(n);
  for (std::size_t j = 0; j < n; ++j) matched[j] = buffer[j * n + out.perm[j]];
  std::sort(matched.begin(), matched.end());
  double sum = 0.0;
  for (double v : matched) sum += v;
  out.total_cost = sum / static_cast<double>(n);
  return out;
}

double wasserstein2(const PointSet& s, const PointSet& r) {
  return solve_lap(cost_matrix(s, r)).total_cost;
}

LotEmbedding lot_transform(const PointSet& s, const PointSet& r) {
  const Assignment a = solve_lap(cost_matrix(s, r));
  LotEmbedding e;
  e.matrix.resize(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(s.dim()));
  for (std::size_t j = 0; j < a.perm.size(); ++j) {
    e.matrix.row(static_cast<Eigen::Index>(j)) = s.points().row(static_cast<Eigen::Index>(a.perm[j]));
  }
  e.reference_id = pointset_id(r);
  return e;
}

double lot_distance(const LotEmbedding& a, const LotEmbedding& b) {
  if (a.reference_id != b.reference_id) {
    throw Error(ErrorKind::ReferenceMismatch, "embeddings were computed against different references");
  }
  if (a.matrix.rows() != b.matrix.rows() || a.matrix.cols() != b.matrix.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "embedding shapes differ");
  }
  return std::sqrt((a.matrix - b.matrix).squaredNorm() / static_cast<double>(a.matrix.rows()));
}

}  // namespace lotsub
