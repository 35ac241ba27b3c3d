#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lotsub/numerics.hpp"
#include "lotsub/ot.hpp"

namespace lotsub {

/// Which deformation spanning sets enrich each class subspace.
struct InvarianceFlags {
  bool translation = false;  // U_T
  bool aniso_scale = false;  // U_D
  bool shear = false;        // U_S

  static InvarianceFlags none() { return {}; }
  static InvarianceFlags all() { return {true, true, true}; }
  /// Parses a subset of "T,D,S" (case-insensitive, any order; "" or "none" for no flags).
  static InvarianceFlags parse(const std::string& text);
  /// Canonical text form, e.g. "T,D,S" or "none".
  std::string str() const;

  bool operator==(const InvarianceFlags&) const = default;
};

enum class SpanningKind { Translation, AnisoScale, Shear };

struct SpanningSet {
  SpanningKind kind;
  std::vector<FlatVector> vectors;
};

/// U_T (L vectors; depends only on N and L).
SpanningSet translation_vectors(std::size_t n, std::size_t l);
/// U_D for one embedding: vector d keeps column d, zeros elsewhere.
SpanningSet aniso_scale_vectors(const RowMatrix& embedding);
/// U_S for one embedding: vector (i, j), i != j, places column j into column i.
/// Ordered by i, then j.
SpanningSet shear_vectors(const RowMatrix& embedding);

/// The enabled sets among U_T, U_D(e), U_S(e), in that order. Isotropic
/// scaling needs no vectors: scalar multiples already lie in the span.
std::vector<SpanningSet> build_invariance_vectors(const LotEmbedding& e, InvarianceFlags flags);

/// Columns: flattened embeddings in order, then U_T once, then U_D of every
/// embedding, then U_S of every embedding.
Matrix assemble_class_matrix(const std::vector<LotEmbedding>& embeddings, InvarianceFlags flags);

struct FittedBasis {
  Matrix basis;
  double explained_variance_fraction = 0.0;
};

/// Leading left singular vectors of a (no centring) explaining at least
/// variance_fraction of sum(sigma_i^2). Numerically-zero singular values are
/// never included.
FittedBasis fit_basis(const Matrix& a, double variance_fraction);

struct ClassSubspace {
  int class_label = 0;
  PointSet reference;
  Matrix basis;  // (N*L) x m, orthonormal columns
  double explained_variance_fraction = 0.0;
};

struct LotNsModel {
  std::size_t num_points = 0;  // N
  std::size_t dim = 0;         // L
  InvarianceFlags flags;
  double variance_fraction = 0.99;
  std::vector<ClassSubspace> classes;

  int num_classes() const { return static_cast<int>(classes.size()); }
};

struct TrainConfig {
  InvarianceFlags flags = InvarianceFlags::all();
  double variance_fraction = 0.99;
  double reference_jitter = 0.1;
  std::uint64_t seed = 0;
};

/// Per class: pick and perturb a reference, LOT-embed every class sample
/// against it, assemble with the enabled spanning sets and fit the basis.
LotNsModel train(const LabeledDataset& dataset, const TrainConfig& cfg);

struct Prediction {
  int label = 0;
  std::vector<double> scores;  // squared residual per class
};

/// Embeds p once per class reference and returns the class of the nearest
/// subspace; ties go to the lowest class index.
Prediction predict(const PointSet& p, const LotNsModel& model);

/// Embeddings of p against every class reference, flattened, in class order.
std::vector<FlatVector> embed_per_class(const PointSet& p, const LotNsModel& model);

/// predict() on embeddings already computed by embed_per_class().
Prediction predict_embedded(const std::vector<FlatVector>& per_class, const LotNsModel& model);

/// Index of the smallest score, lowest index on ties.
int argmin_label(const std::vector<double>& scores);

}  // namespace lotsub
