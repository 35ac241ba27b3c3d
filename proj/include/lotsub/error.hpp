#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lotsub {

enum class ErrorKind {
  // pointset-core
  NonFiniteCoordinate,
  EmptyPointSet,
  DimensionZero,
  CoordinateOverflow,
  InvalidPermutation,
  // numerics
  ConvergenceFailure,
  ShapeMismatch,
  NonOrthonormalBasis,
  ZeroMatrix,
  // ot
  CardinalityMismatch,
  DimensionMismatch,
  ReferenceMismatch,
  // deformation / training
  SingularDraw,
  EmptyClass,
  InvalidArgument,
  TooFewPoints,
  DegenerateInput,
  // io
  ParseError,
  RaggedRows,
  EmptyFile,
  MissingFile,
  LabelGap,
  IoError,
  VersionMismatch,
  ChecksumMismatch,
  // harness
  ConfigError,
  InfeasibleSplit,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-checkable ErrorKind next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lotsub
