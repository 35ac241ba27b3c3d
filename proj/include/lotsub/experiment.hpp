#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lotsub/baselines.hpp"
#include "lotsub/deform.hpp"
#include "lotsub/subspace.hpp"

namespace lotsub {

/// Settings shared by gen, curve and ood. Read from a flat "key = value"
/// text file; see parse_experiment_config for the keys.
struct ExperimentConfig {
  // Data source: "synthetic" (built-in or CSV templates) or "manifest".
  std::string source = "synthetic";
  std::filesystem::path train_manifest;
  std::filesystem::path test_manifest;
  std::optional<std::size_t> target_n;

  // Synthetic generation.
  std::string templates = "builtin";  // or a directory holding class_<k>.csv
  int classes = 10;
  std::size_t points = 256;
  int n_train = 2;  // training pool per class
  int n_test = 25;
  DeformationConfig deform_in;
  DeformationConfig deform_out = DeformationConfig{}.scaled(2.0);

  // Protocol.
  std::vector<std::string> methods;
  std::vector<int> splits = {2};
  int repeats = 1;
  std::uint64_t seed = 0;

  // Proposed method.
  InvarianceFlags flags = InvarianceFlags::all();
  double variance = 0.99;
  double reference_jitter = 0.1;

  // Baselines.
  LinearHyper linear;
  std::size_t fsort_k = 16;

  std::filesystem::path out = "results";

  /// Throws ConfigError on invalid combinations.
  void check() const;
};

/// Every method the harness knows, proposed method first.
std::vector<std::string> all_methods();
inline const std::string kProposedMethod = "lot";

/// Keys: source, train_manifest, test_manifest, target_n, templates, classes,
/// points, n_train, n_test, translate_max, scale_max, shear_max, jitter_std,
/// ood_factor, ood_translate_max, ood_scale_max, ood_shear_max, ood_jitter_std,
/// methods, splits, repeats, seed, flags, variance, reference_jitter,
/// lr_rate, lr_l2, lr_iters, fsort_k, out. '#' starts a comment.
/// Relative paths are resolved against base_dir.
ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Templates for synthetic runs (built-in shapes or class_<k>.csv files).
std::vector<PointSet> load_templates(const ExperimentConfig& cfg);

struct ExperimentData {
  LabeledDataset train;
  LabeledDataset test;      // matched distribution
  LabeledDataset test_ood;  // only filled for OOD runs on synthetic data
};

/// Synthetic data from the templates, or manifests when source = manifest.
/// The OOD test set reuses the matched test substream with deform_out, so
/// deform_out == deform_in reproduces the matched test set exactly.
ExperimentData prepare_data(const ExperimentConfig& cfg, bool with_ood);

struct MethodScore {
  std::string method;
  std::vector<int> correct;  // per evaluation set
  int total_train = 0;
  double train_seconds = 0.0;
  double test_seconds = 0.0;
};

/// Trains every method on `train` and scores it on each evaluation set.
/// All methods see the same data; `seed` drives the proposed method's references.
std::vector<MethodScore> evaluate_methods(const LabeledDataset& train,
                                          const std::vector<const LabeledDataset*>& eval_sets,
                                          const std::vector<std::string>& methods, const ExperimentConfig& cfg,
                                          std::uint64_t seed);

/// The proposed classifier trained with the config's flags, variance and reference jitter.
LotNsModel train_model(const LabeledDataset& train, const ExperimentConfig& cfg, std::uint64_t seed);

/// Per class, `per_class` samples drawn without replacement (dataset order kept).
LabeledDataset subsample_per_class(const LabeledDataset& pool, int per_class, std::uint64_t seed);

struct ResultRow {
  std::string method;
  int split_size = 0;
  int repeat_index = 0;
  int correct = 0;
  int total = 0;
  double accuracy = 0.0;
  double train_seconds = 0.0;
  double test_seconds = 0.0;
};

struct OodRow {
  std::string method;
  int split_size = 0;
  int repeat_index = 0;
  double matched_accuracy = 0.0;
  double ood_accuracy = 0.0;
  double drop = 0.0;
};

/// Accuracy-vs-split-size protocol; rows sorted by (method, split, repeat).
std::vector<ResultRow> run_curve(const ExperimentConfig& cfg, const ExperimentData& data);
/// Matched vs out-of-distribution protocol; rows sorted by (method, split, repeat).
std::vector<OodRow> run_ood(const ExperimentConfig& cfg, const ExperimentData& data);

/// Writes results.csv, timings.csv, summary.csv and curve.svg into cfg.out.
void write_curve_outputs(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows);
/// Writes ood_results.csv, ood_summary.csv and ood.svg into cfg.out.
void write_ood_outputs(const ExperimentConfig& cfg, const std::vector<OodRow>& rows);

}  // namespace lotsub
