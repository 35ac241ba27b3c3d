#include "lotsub/pointset.hpp"

#include <cmath>
#include <string>

namespace lotsub {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFiniteCoordinate: return "NonFiniteCoordinate";
    case ErrorKind::EmptyPointSet: return "EmptyPointSet";
    case ErrorKind::DimensionZero: return "DimensionZero";
    case ErrorKind::CoordinateOverflow: return "CoordinateOverflow";
    case ErrorKind::InvalidPermutation: return "InvalidPermutation";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonOrthonormalBasis: return "NonOrthonormalBasis";
    case ErrorKind::ZeroMatrix: return "ZeroMatrix";
    case ErrorKind::CardinalityMismatch: return "CardinalityMismatch";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ReferenceMismatch: return "ReferenceMismatch";
    case ErrorKind::SingularDraw: return "SingularDraw";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::RaggedRows: return "RaggedRows";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::LabelGap: return "LabelGap";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::InfeasibleSplit: return "InfeasibleSplit";
  }
  return "Unknown";
}

void validate(const RowMatrix& points) {
  if (points.cols() == 0) throw Error(ErrorKind::DimensionZero, "point dimension L must be >= 1");
  if (points.rows() == 0) throw Error(ErrorKind::EmptyPointSet, "point set has no points");
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index d = 0; d < points.cols(); ++d) {
      const double x = points(i, d);
      if (!std::isfinite(x)) {
        throw Error(ErrorKind::NonFiniteCoordinate,
                    "point " + std::to_string(i) + " coordinate " + std::to_string(d));
      }
      if (std::abs(x) > kMaxCoordinateMagnitude) {
        throw Error(ErrorKind::CoordinateOverflow,
                    "point " + std::to_string(i) + " exceeds magnitude 1e100");
      }
    }
  }
}

PointSet::PointSet(RowMatrix points) : points_(std::move(points)) { validate(points_); }

bool PointSet::operator==(const PointSet& other) const {
  return points_.rows() == other.points_.rows() && points_.cols() == other.points_.cols() &&
         points_ == other.points_;
}

FlatVector flatten(const RowMatrix& m) {
  // Row-major storage already is the point-major layout.
  return Eigen::Map<const FlatVector>(m.data(), m.size());
}

RowMatrix unflatten(const FlatVector& v, std::size_t n, std::size_t l) {
  if (static_cast<std::size_t>(v.size()) != n * l) {
    throw Error(ErrorKind::ShapeMismatch, "flat vector length " + std::to_string(v.size()) +
                                              " != " + std::to_string(n) + "*" + std::to_string(l));
  }
  return Eigen::Map<const RowMatrix>(v.data(), static_cast<Eigen::Index>(n),
                                     static_cast<Eigen::Index>(l));
}

bool is_permutation(std::span<const std::size_t> perm, std::size_t n) {
  if (perm.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n || seen[p]) return false;
    seen[p] = true;
  }
  return true;
}

PointSet permute_points(const PointSet& p, std::span<const std::size_t> perm) {
  if (!is_permutation(perm, p.size())) {
    throw Error(ErrorKind::InvalidPermutation, "not a bijection on 0.." + std::to_string(p.size() - 1));
  }
  RowMatrix out(p.points().rows(), p.points().cols());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = p.points().row(static_cast<Eigen::Index>(perm[i]));
  }
  return PointSet(std::move(out));
}

std::vector<std::size_t> LabeledDataset::indices_of(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].label == label) out.push_back(i);
  }
  return out;
}

void LabeledDataset::check(bool require_all_classes) const {
  if (num_classes < 1) throw Error(ErrorKind::InvalidArgument, "dataset needs K >= 1 classes");
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.label < 0 || s.label >= num_classes) {
      throw Error(ErrorKind::LabelGap, "sample " + std::to_string(i) + " label " +
                                           std::to_string(s.label) + " outside 0..K-1");
    }
    if (s.points.dim() != samples.front().points.dim()) {
      throw Error(ErrorKind::DimensionMismatch, "sample " + std::to_string(i) + " has dimension " +
                                                    std::to_string(s.points.dim()));
    }
    ++counts[static_cast<std::size_t>(s.label)];
  }
  if (require_all_classes) {
    for (int k = 0; k < num_classes; ++k) {
      if (counts[static_cast<std::size_t>(k)] == 0) {
        throw Error(ErrorKind::EmptyClass, "class " + std::to_string(k) + " has no samples");
      }
    }
  }
}

std::size_t LabeledDataset::common_size() const {
  if (samples.empty()) return 0;
  const std::size_t n = samples.front().points.size();
  for (const auto& s : samples) {
    if (s.points.size() != n) return 0;
  }
  return n;
}

}  // namespace lotsub
