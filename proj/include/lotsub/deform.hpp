#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "lotsub/pointset.hpp"

namespace lotsub {

using Rng = std::mt19937_64;

/// Seed for a named substream: splitmix64 over (seed, tag, index). Every
/// random draw in the library flows from a root seed through this function.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

/// x -> linear * x + shift.
struct AffineMap {
  Eigen::MatrixXd linear;
  Eigen::VectorXd shift;

  static AffineMap identity(std::size_t dim);
  std::size_t dim() const { return static_cast<std::size_t>(shift.size()); }
};

/// Returns outer o inner, i.e. x -> outer(inner(x)).
AffineMap compose(const AffineMap& outer, const AffineMap& inner);

/// Parameterwise convex combination (1 - c) * a + c * b of the linear parts and shifts.
AffineMap interpolate(const AffineMap& a, const AffineMap& b, double c);

PointSet apply_affine(const AffineMap& g, const PointSet& p);

/// Magnitudes of the random affine family.
///
/// linear = Shear * Scale where Scale = diag(exp(u_d)), u_d ~ U[-ln(scale_max), ln(scale_max)],
/// Shear has a unit diagonal and off-diagonals ~ U[-shear_max, shear_max], and each shift
/// component ~ U[-translate_max, translate_max]. Sampled points additionally receive
/// isotropic Gaussian jitter of std jitter_std.
struct DeformationConfig {
  double translate_max = 1.0;
  double scale_max = 2.0;
  double shear_max = 0.25;
  double jitter_std = 0.0;

  void check() const;
  /// Multiplies every magnitude by factor; the scale bound is scaled in log space.
  DeformationConfig scaled(double factor) const;
  static DeformationConfig none() { return {0.0, 1.0, 0.0, 0.0}; }
};

AffineMap sample_affine(Rng& rng, const DeformationConfig& cfg, std::size_t dim);

struct SynthSpec {
  std::vector<PointSet> templates;
  int n_train = 2;
  int n_test = 25;
  DeformationConfig config_train;
  DeformationConfig config_test;
  std::uint64_t seed = 0;
};

struct SplitDatasets {
  LabeledDataset train;
  LabeledDataset test;
};

/// Samples are ordered by class, then by draw index. Each (class, split)
/// pair has its own substream, so generation order does not matter.
SplitDatasets synth_dataset(const SynthSpec& spec);

/// One split of the generative model: n samples per class drawn with cfg
/// from the substream tagged split_tag.
LabeledDataset synth_split(const std::vector<PointSet>& templates, int n_per_class,
                           const DeformationConfig& cfg, std::uint64_t seed, std::string_view split_tag);

/// Mean distance from each point to its nearest neighbour (0 for N = 1).
double mean_nearest_neighbor_distance(const PointSet& p);

/// A uniformly chosen class-k training sample with i.i.d. Gaussian noise of
/// std rho * (mean nearest-neighbour distance of that sample).
PointSet make_reference(const LabeledDataset& train, int k, double rho, Rng& rng);

/// Number of built-in planar template shapes with fixed geometry; further
/// classes get seeded random closed curves.
inline constexpr int kNamedTemplates = 12;

/// K planar templates with n points each, centred and scaled to unit RMS radius.
std::vector<PointSet> builtin_templates(int k, std::size_t n, std::uint64_t seed);

/// Centre at the origin and scale to unit root-mean-square radius.
PointSet normalize_template(const PointSet& p);

}  // namespace lotsub
