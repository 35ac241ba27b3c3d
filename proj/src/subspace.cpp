#include "lotsub/subspace.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "lotsub/deform.hpp"

namespace lotsub {

InvarianceFlags InvarianceFlags::parse(const std::string& text) {
  InvarianceFlags f;
  std::string token;
  std::stringstream ss(text);
  while (std::getline(ss, token, ',')) {
    token.erase(std::remove_if(token.begin(), token.end(), [](unsigned char c) { return std::isspace(c); }),
                token.end());
    std::transform(token.begin(), token.end(), token.begin(), [](unsigned char c) { return std::toupper(c); });
    if (token.empty() || token == "NONE") continue;
    if (token == "T") {
      f.translation = true;
    } else if (token == "D") {
      f.aniso_scale = true;
    } else if (token == "S") {
      f.shear = true;
    } else {
      throw Error(ErrorKind::ConfigError, "unknown invariance flag '" + token + "' (expected T, D, S)");
    }
  }
  return f;
}

std::string InvarianceFlags::str() const {
  std::string out;
  const auto add = [&out](const char* s) {
    if (!out.empty()) out += ',';
    out += s;
  };
  if (translation) add("T");
  if (aniso_scale) add("D");
  if (shear) add("S");
  return out.empty() ? "none" : out;
}

SpanningSet translation_vectors(std::size_t n, std::size_t l) {
  SpanningSet set{SpanningKind::Translation, {}};
  for (std::size_t d = 0; d < l; ++d) {
    RowMatrix m = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l));
    m.col(static_cast<Eigen::Index>(d)).setOnes();
    set.vectors.push_back(flatten(m));
  }
  return set;
}

SpanningSet aniso_scale_vectors(const RowMatrix& embedding) {
  SpanningSet set{SpanningKind::AnisoScale, {}};
  for (Eigen::Index d = 0; d < embedding.cols(); ++d) {
    RowMatrix m = RowMatrix::Zero(embedding.rows(), embedding.cols());
    m.col(d) = embedding.col(d);
    set.vectors.push_back(flatten(m));
  }
  return set;
}

SpanningSet shear_vectors(const RowMatrix& embedding) {
  SpanningSet set{SpanningKind::Shear, {}};
  for (Eigen::Index i = 0; i < embedding.cols(); ++i) {
    for (Eigen::Index j = 0; j < embedding.cols(); ++j) {
      if (i == j) continue;
      RowMatrix m = RowMatrix::Zero(embedding.rows(), embedding.cols());
      m.col(i) = embedding.col(j);
      set.vectors.push_back(flatten(m));
    }
  }
  return set;
}

std::vector<SpanningSet> build_invariance_vectors(const LotEmbedding& e, InvarianceFlags flags) {
  std::vector<SpanningSet> out;
  if (flags.translation) out.push_back(translation_vectors(e.size(), e.dim()));
  if (flags.aniso_scale) out.push_back(aniso_scale_vectors(e.matrix));
  if (flags.shear) out.push_back(shear_vectors(e.matrix));
  return out;
}

Matrix assemble_class_matrix(const std::vector<LotEmbedding>& embeddings, InvarianceFlags flags) {
  if (embeddings.empty()) throw Error(ErrorKind::EmptyClass, "no embeddings to assemble");
  const LotEmbedding& first = embeddings.front();
  for (const auto& e : embeddings) {
    if (e.reference_id != first.reference_id) {
      throw Error(ErrorKind::ReferenceMismatch, "class embeddings must share one reference");
    }
    if (e.size() != first.size() || e.dim() != first.dim()) {
      throw Error(ErrorKind::ShapeMismatch, "class embeddings must share N and L");
    }
  }
  std::vector<FlatVector> columns;
  for (const auto& e : embeddings) columns.push_back(e.flat());
  if (flags.translation) {
    for (auto& v : translation_vectors(first.size(), first.dim()).vectors) columns.push_back(std::move(v));
  }
  if (flags.aniso_scale) {
    for (const auto& e : embeddings) {
      for (auto& v : aniso_scale_vectors(e.matrix).vectors) columns.push_back(std::move(v));
    }
  }
  if (flags.shear) {
    for (const auto& e : embeddings) {
      for (auto& v : shear_vectors(e.matrix).vectors) columns.push_back(std::move(v));
    }
  }
  Matrix a(static_cast<Eigen::Index>(first.size() * first.dim()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) a.col(static_cast<Eigen::Index>(c)) = columns[c];
  return a;
}

FittedBasis fit_basis(const Matrix& a, double variance_fraction) {
  if (!(variance_fraction > 0.0 && variance_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "variance fraction must lie in (0, 1]");
  }
  if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorKind::ZeroMatrix, "cannot fit a basis to a zero matrix");

  const SvdResult dec = svd(a);
  const Eigen::Index rank = dec.numerical_rank(a.rows(), a.cols());
  const Eigen::VectorXd energy = dec.singular_values.array().square();
  const double total = energy.sum();

  // Thresholds met up to roundoff count as met; fraction 1 keeps the whole numerical rank.
  const double target = variance_fraction < 1.0 ? (variance_fraction - 1e-12) * total : total;
  Eigen::Index m = 0;
  double captured = 0.0;
  while (m < rank && (variance_fraction >= 1.0 || captured < target)) captured += energy(m++);
  m = std::max<Eigen::Index>(m, 1);
  captured = energy.head(m).sum();
  return {dec.left_vectors.leftCols(m), captured / total};
}

LotNsModel train(const LabeledDataset& dataset, const TrainConfig& cfg) {
  dataset.check(true);
  const std::size_t n = dataset.common_size();
  if (n == 0) throw Error(ErrorKind::CardinalityMismatch, "training samples must share N; resample on ingest");

  LotNsModel model;
  model.num_points = n;
  model.dim = dataset.samples.front().points.dim();
  model.flags = cfg.flags;
  model.variance_fraction = cfg.variance_fraction;

  for (int k = 0; k < dataset.num_classes; ++k) {
    Rng rng(derive_seed(cfg.seed, "reference", static_cast<std::uint64_t>(k)));
    PointSet reference = make_reference(dataset, k, cfg.reference_jitter, rng);
    std::vector<LotEmbedding> embeddings;
    for (std::size_t idx : dataset.indices_of(k)) {
      embeddings.push_back(lot_transform(dataset.samples[idx].points, reference));
    }
    FittedBasis fitted = fit_basis(assemble_class_matrix(embeddings, cfg.flags), cfg.variance_fraction);
    model.classes.push_back({k, std::move(reference), std::move(fitted.basis), fitted.explained_variance_fraction});
  }
  return model;
}

int argmin_label(const std::vector<double>& scores) {
  int best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] < scores[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  }
  return best;
}

std::vector<FlatVector> embed_per_class(const PointSet& p, const LotNsModel& model) {
  if (p.dim() != model.dim) {
    throw Error(ErrorKind::DimensionMismatch,
                "sample dimension " + std::to_string(p.dim()) + " vs model " + std::to_string(model.dim));
  }
  if (p.size() != model.num_points) {
    throw Error(ErrorKind::CardinalityMismatch,
                "sample has " + std::to_string(p.size()) + " points, model expects " + std::to_string(model.num_points));
  }
  std::vector<FlatVector> out;
  out.reserve(model.classes.size());
  for (const auto& cls : model.classes) out.push_back(lot_transform(p, cls.reference).flat());
  return out;
}

Prediction predict_embedded(const std::vector<FlatVector>& per_class, const LotNsModel& model) {
  if (per_class.size() != model.classes.size()) throw Error(ErrorKind::ShapeMismatch, "one embedding per class required");
  Prediction out;
  out.scores.reserve(per_class.size());
  for (std::size_t k = 0; k < per_class.size(); ++k) {
    if (per_class[k].size() != model.classes[k].basis.rows()) throw Error(ErrorKind::ShapeMismatch, "embedding length differs from basis rows");
    out.scores.push_back(project_residual_unchecked(per_class[k], model.classes[k].basis));
  }
  out.label = argmin_label(out.scores);
  return out;
}

Prediction predict(const PointSet& p, const LotNsModel& model) {
  return predict_embedded(embed_per_class(p, model), model);
}

}  // namespace lotsub
