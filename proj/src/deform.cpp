#include "lotsub/deform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace lotsub {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
}

using Polyline = std::vector<Eigen::Vector2d>;

// Uniform-by-arc-length samples along a union of polylines.
RowMatrix sample_polylines(const std::vector<Polyline>& lines, std::size_t n, Rng& rng) {
  std::vector<double> cumulative;
  std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> segments;
  double total = 0.0;
  for (const auto& line : lines) {
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      segments.emplace_back(line[i], line[i + 1]);
      total += (line[i + 1] - line[i]).norm();
      cumulative.push_back(total);
    }
  }
  RowMatrix out(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = uniform(rng, 0.0, total);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    const std::size_t seg = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), segments.size() - 1);
    const double start = seg == 0 ? 0.0 : cumulative[seg - 1];
    const double len = cumulative[seg] - start;
    const double t = len > 0.0 ? (s - start) / len : 0.0;
    const auto& [a, b] = segments[seg];
    out.row(static_cast<Eigen::Index>(i)) = (a + t * (b - a)).transpose();
  }
  return out;
}

template <typename Curve>
RowMatrix sample_curve(Curve&& curve, std::size_t n, Rng& rng) {
  RowMatrix out(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    out.row(static_cast<Eigen::Index>(i)) = curve(uniform(rng, 0.0, 1.0)).transpose();
  }
  return out;
}

RowMatrix named_shape(int id, std::size_t n, Rng& rng) {
  constexpr double pi = std::numbers::pi;
  using V = Eigen::Vector2d;
  switch (id) {
    case 0:  // ring
      return sample_curve([](double t) { return V(std::cos(2 * pi * t), std::sin(2 * pi * t)); }, n, rng);
    case 1:  // square outline
      return sample_polylines({{V(-1, -1), V(1, -1), V(1, 1), V(-1, 1), V(-1, -1)}}, n, rng);
    case 2:  // triangle outline
      return sample_polylines({{V(0, 1.2), V(-1, -0.6), V(1, -0.6), V(0, 1.2)}}, n, rng);
    case 3:  // plus sign
      return sample_polylines({{V(-1, 0), V(1, 0)}, {V(0, -1), V(0, 1)}}, n, rng);
    case 4:  // filled disk
      return sample_curve(
          [&rng](double t) {
            const double r = std::sqrt(uniform(rng, 0.0, 1.0));
            return V(r * std::cos(2 * pi * t), r * std::sin(2 * pi * t));
          },
          n, rng);
    case 5:  // spiral
      return sample_curve(
          [](double t) {
            const double r = 0.2 + 0.8 * t;
            return V(r * std::cos(3 * pi * t), r * std::sin(3 * pi * t));
          },
          n, rng);
    case 6:  // figure eight of two tangent rings
      return sample_curve(
          [](double t) {
            const double cx = t < 0.5 ? -1.0 : 1.0;
            const double a = 4 * pi * t;
            return V(cx + std::cos(a), std::sin(a));
          },
          n, rng);
    case 7: {  // five-point star outline
      Polyline star;
      for (int v = 0; v <= 10; ++v) {
        const double r = v % 2 == 0 ? 1.0 : 0.4;
        const double a = pi / 2 + v * pi / 5;
        star.emplace_back(r * std::cos(a), r * std::sin(a));
      }
      return sample_polylines({star}, n, rng);
    }
    case 8:  // letter L
      return sample_polylines({{V(0, 2), V(0, 0), V(1.2, 0)}}, n, rng);
    case 9:  // one period of a sine wave
      return sample_curve([](double t) { return V(2 * pi * t - pi, 0.8 * std::sin(2 * pi * t - pi)); }, n, rng);
    case 10: {  // two separated blobs
      std::normal_distribution<double> normal(0.0, 0.3);
      RowMatrix out(static_cast<Eigen::Index>(n), 2);
      for (std::size_t i = 0; i < n; ++i) {
        const double cx = i % 2 == 0 ? -1.0 : 1.0;
        out(static_cast<Eigen::Index>(i), 0) = cx + normal(rng);
        out(static_cast<Eigen::Index>(i), 1) = normal(rng);
      }
      return out;
    }
    case 11:  // letter T
      return sample_polylines({{V(-1, 1), V(1, 1)}, {V(0, 1), V(0, -1)}}, n, rng);
    default:
      break;
  }
  // Random smooth closed curve r(theta) = 1 + low-order Fourier perturbation.
  std::vector<double> a(4), b(4);
  for (int m = 0; m < 4; ++m) {
    a[static_cast<std::size_t>(m)] = uniform(rng, -0.25, 0.25);
    b[static_cast<std::size_t>(m)] = uniform(rng, -0.25, 0.25);
  }
  return sample_curve(
      [&](double t) {
        const double th = 2 * pi * t;
        double r = 1.0;
        for (int m = 0; m < 4; ++m) {
          r += a[static_cast<std::size_t>(m)] * std::cos((m + 1) * th) +
               b[static_cast<std::size_t>(m)] * std::sin((m + 1) * th);
        }
        return V(r * std::cos(th), r * std::sin(th));
      },
      n, rng);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  for (char ch : tag) h = splitmix64(h ^ static_cast<unsigned char>(ch));
  return splitmix64(h ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

AffineMap AffineMap::identity(std::size_t dim) {
  const auto l = static_cast<Eigen::Index>(dim);
  return {Eigen::MatrixXd::Identity(l, l), Eigen::VectorXd::Zero(l)};
}

AffineMap compose(const AffineMap& outer, const AffineMap& inner) {
  if (outer.dim() != inner.dim()) throw Error(ErrorKind::DimensionMismatch, "cannot compose maps of different dimension");
  return {outer.linear * inner.linear, outer.linear * inner.shift + outer.shift};
}

AffineMap interpolate(const AffineMap& a, const AffineMap& b, double c) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "cannot interpolate maps of different dimension");
  return {(1.0 - c) * a.linear + c * b.linear, (1.0 - c) * a.shift + c * b.shift};
}

PointSet apply_affine(const AffineMap& g, const PointSet& p) {
  if (g.dim() != p.dim() || static_cast<std::size_t>(g.linear.rows()) != p.dim() ||
      static_cast<std::size_t>(g.linear.cols()) != p.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "map dimension " + std::to_string(g.dim()) + " vs point dimension " + std::to_string(p.dim()));
  }
  RowMatrix out = p.points() * g.linear.transpose();
  out.rowwise() += g.shift.transpose();
  return PointSet(std::move(out));
}

void DeformationConfig::check() const {
  if (!(translate_max >= 0.0) || !(scale_max >= 1.0) || !(shear_max >= 0.0) || !(jitter_std >= 0.0) ||
      !std::isfinite(translate_max) || !std::isfinite(scale_max) || !std::isfinite(shear_max) ||
      !std::isfinite(jitter_std)) {
    throw Error(ErrorKind::InvalidArgument,
                "deformation config needs translate_max >= 0, scale_max >= 1, shear_max >= 0, jitter_std >= 0");
  }
}

DeformationConfig DeformationConfig::scaled(double factor) const {
  return {translate_max * factor, std::pow(scale_max, factor), shear_max * factor, jitter_std};
}

AffineMap sample_affine(Rng& rng, const DeformationConfig& cfg, std::size_t dim) {
  cfg.check();
  const auto l = static_cast<Eigen::Index>(dim);
  const double log_scale = std::log(cfg.scale_max);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Eigen::MatrixXd scale = Eigen::MatrixXd::Zero(l, l);
    for (Eigen::Index d = 0; d < l; ++d) scale(d, d) = std::exp(uniform(rng, -log_scale, log_scale));
    Eigen::MatrixXd shear = Eigen::MatrixXd::Identity(l, l);
    for (Eigen::Index i = 0; i < l; ++i) {
      for (Eigen::Index j = 0; j < l; ++j) {
        if (i != j) shear(i, j) = uniform(rng, -cfg.shear_max, cfg.shear_max);
      }
    }
    Eigen::VectorXd shift(l);
    for (Eigen::Index d = 0; d < l; ++d) shift(d) = uniform(rng, -cfg.translate_max, cfg.translate_max);
    Eigen::MatrixXd linear = shear * scale;
    if (std::abs(linear.determinant()) > 1e-12) return {std::move(linear), std::move(shift)};
  }
  throw Error(ErrorKind::SingularDraw, "100 consecutive affine draws were singular");
}

LabeledDataset synth_split(const std::vector<PointSet>& templates, int n_per_class,
                           const DeformationConfig& cfg, std::uint64_t seed, std::string_view split_tag) {
  if (templates.empty()) throw Error(ErrorKind::InvalidArgument, "no templates");
  if (n_per_class < 1) throw Error(ErrorKind::InvalidArgument, "samples per class must be >= 1");
  cfg.check();
  LabeledDataset out;
  out.num_classes = static_cast<int>(templates.size());
  const std::size_t dim = templates.front().dim();
  for (int k = 0; k < out.num_classes; ++k) {
    const PointSet& tpl = templates[static_cast<std::size_t>(k)];
    if (tpl.dim() != dim) throw Error(ErrorKind::DimensionMismatch, "templates must share dimension");
    Rng rng(derive_seed(seed, split_tag, static_cast<std::uint64_t>(k)));
    std::normal_distribution<double> jitter(0.0, 1.0);
    for (int j = 0; j < n_per_class; ++j) {
      const AffineMap g = sample_affine(rng, cfg, dim);
      RowMatrix pts = apply_affine(g, tpl).points();
      if (cfg.jitter_std > 0.0) {
        for (Eigen::Index e = 0; e < pts.size(); ++e) pts.data()[e] += cfg.jitter_std * jitter(rng);
      }
      out.samples.push_back({PointSet(std::move(pts)), k});
    }
  }
  return out;
}

SplitDatasets synth_dataset(const SynthSpec& spec) {
  if (spec.n_train < 1 || spec.n_test < 1) throw Error(ErrorKind::InvalidArgument, "n_train and n_test must be >= 1");
  return {synth_split(spec.templates, spec.n_train, spec.config_train, spec.seed, "train"),
          synth_split(spec.templates, spec.n_test, spec.config_test, spec.seed, "test")};
}

double mean_nearest_neighbor_distance(const PointSet& p) {
  const auto n = static_cast<Eigen::Index>(p.size());
  if (n < 2) return 0.0;
  const RowMatrix& x = p.points();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) best = std::min(best, (x.row(i) - x.row(j)).squaredNorm());
    }
    total += std::sqrt(best);
  }
  return total / static_cast<double>(n);
}

PointSet make_reference(const LabeledDataset& train, int k, double rho, Rng& rng) {
  const auto members = train.indices_of(k);
  if (members.empty()) throw Error(ErrorKind::EmptyClass, "class " + std::to_string(k) + " has no training samples");
  if (!(rho >= 0.0)) throw Error(ErrorKind::InvalidArgument, "reference jitter scale must be >= 0");
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
  const PointSet& chosen = train.samples[members[pick(rng)]].points;
  if (rho == 0.0) return chosen;
  const double sigma = rho * mean_nearest_neighbor_distance(chosen);
  std::normal_distribution<double> noise(0.0, 1.0);
  RowMatrix pts = chosen.points();
  for (Eigen::Index e = 0; e < pts.size(); ++e) pts.data()[e] += sigma * noise(rng);
  return PointSet(std::move(pts));
}

PointSet normalize_template(const PointSet& p) {
  RowMatrix pts = p.points();
  pts.rowwise() -= pts.colwise().mean();
  const double rms = std::sqrt(pts.squaredNorm() / static_cast<double>(pts.rows()));
  if (rms > 0.0) pts /= rms;
  return PointSet(std::move(pts));
}

std::vector<PointSet> builtin_templates(int k, std::size_t n, std::uint64_t seed) {
  if (k < 1 || n < 1) throw Error(ErrorKind::InvalidArgument, "need at least one class and one point");
  std::vector<PointSet> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    Rng rng(derive_seed(seed, "template", static_cast<std::uint64_t>(c)));
    out.push_back(normalize_template(PointSet(named_shape(c, n, rng))));
  }
  return out;
}

}  // namespace lotsub
