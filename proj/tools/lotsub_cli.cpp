// lotsub: generate synthetic point-set datasets, train and apply the LOT
// nearest-subspace classifier, and run the curve / out-of-distribution
// benchmarks.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lotsub/experiment.hpp"
#include "lotsub/io.hpp"

namespace fs = std::filesystem;
using namespace lotsub;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::InfeasibleSplit:
      return kExitConfig;
    case ErrorKind::ConvergenceFailure:
    case ErrorKind::SingularDraw:
    case ErrorKind::ZeroMatrix:
    case ErrorKind::NonOrthonormalBasis:
    case ErrorKind::DegenerateInput:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

struct CommonOptions {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  std::string flags;
  std::optional<double> variance;
  std::optional<std::size_t> target_n;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--seed", o.seed, "Root random seed");
  cmd->add_option("--config", o.config, "Flat key = value config file");
  cmd->add_option("--out", o.out, "Output directory (or model path for train)");
  cmd->add_option("--flags", o.flags, "Invariance spanning sets: subset of T,D,S or 'none'");
  cmd->add_option("--variance", o.variance, "Variance fraction kept by each class basis");
  cmd->add_option("--target-n", o.target_n, "Resample every point set to this many points");
}

ExperimentConfig resolve_config(const CommonOptions& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_experiment_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.out = o.out;
  if (!o.flags.empty()) cfg.flags = InvarianceFlags::parse(o.flags);
  if (o.variance) cfg.variance = *o.variance;
  if (o.target_n) cfg.target_n = *o.target_n;
  cfg.check();
  return cfg;
}

int cmd_gen(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve_config(o);
  const ExperimentData data = prepare_data(cfg, false);
  const fs::path train_manifest = write_dataset(data.train, cfg.out, "train");
  const fs::path test_manifest = write_dataset(data.test, cfg.out, "test");
  std::cout << "wrote " << data.train.size() << " training and " << data.test.size() << " test point sets\n"
            << "  " << train_manifest.string() << "\n  " << test_manifest.string() << "\n";
  return 0;
}

int cmd_train(const CommonOptions& o, const std::string& manifest) {
  const ExperimentConfig cfg = resolve_config(o);
  const fs::path model_path = o.out.empty() ? fs::path("model.lotsub") : fs::path(o.out);
  const LabeledDataset train = load_dataset(manifest, cfg.target_n, derive_seed(cfg.seed, "ingest", 0));
  const auto t0 = std::chrono::steady_clock::now();
  const LotNsModel model = train_model(train, cfg, cfg.seed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_model(model, model_path);
  std::cout << "trained " << model.num_classes() << " classes, N=" << model.num_points << " L=" << model.dim
            << " flags=" << model.flags.str() << " variance=" << model.variance_fraction << " in " << secs << " s\n";
  std::cout << "class,samples,basis_size,explained_variance\n";
  for (const auto& cls : model.classes) {
    std::cout << cls.class_label << "," << train.indices_of(cls.class_label).size() << "," << cls.basis.cols() << ","
              << format_real(cls.explained_variance_fraction) << "\n";
  }
  std::cout << "model written to " << model_path.string() << "\n";
  return 0;
}

void print_prediction(const std::string& name, std::optional<int> truth, const Prediction& p) {
  std::cout << name << "," << (truth ? std::to_string(*truth) : std::string()) << "," << p.label;
  for (double s : p.scores) std::cout << "," << format_real(s);
  std::cout << "\n";
}

int cmd_predict(const CommonOptions& o, const std::string& model_path, const std::string& input, bool as_manifest) {
  if (!fs::exists(model_path)) throw Error(ErrorKind::MissingFile, "model file " + model_path);
  const LotNsModel model = load_model(model_path);
  const std::uint64_t seed = o.seed.value_or(0);

  std::cout << "sample,true_label,predicted_label";
  for (int k = 0; k < model.num_classes(); ++k) std::cout << ",residual_" << k;
  std::cout << "\n";

  std::optional<PointSet> single;
  if (!as_manifest) {
    try {
      single = read_pointset_csv(input);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ParseError) throw;
    }
  }
  if (single) {
    PointSet p = o.target_n ? resample_to(*single, *o.target_n, derive_seed(seed, "resample")) : *single;
    print_prediction(input, std::nullopt, predict(p, model));
    return 0;
  }
  const auto entries = read_manifest(input);
  const LabeledDataset ds = load_dataset(input, o.target_n, derive_seed(seed, "ingest", 1));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    print_prediction(entries[i].path.generic_string(), ds.samples[i].label, predict(ds.samples[i].points, model));
  }
  return 0;
}

int cmd_curve(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve_config(o);
  const auto rows = run_curve(cfg, prepare_data(cfg, false));
  write_curve_outputs(cfg, rows);
  std::cout << "wrote " << rows.size() << " result rows to " << (cfg.out / "results.csv").string() << "\n";
  return 0;
}

int cmd_ood(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve_config(o);
  const auto rows = run_ood(cfg, prepare_data(cfg, true));
  write_ood_outputs(cfg, rows);
  std::cout << "wrote " << rows.size() << " result rows to " << (cfg.out / "ood_results.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LOT nearest-subspace point-set classification"};
  app.require_subcommand(1);

  CommonOptions gen_opts, train_opts, predict_opts, curve_opts, ood_opts;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset (train/test CSVs and manifests)");
  add_common(gen, gen_opts);

  std::string train_manifest;
  auto* train = app.add_subcommand("train", "Train a model from a manifest; --out names the model file");
  train->add_option("manifest", train_manifest, "Training manifest (label,path lines)")->required();
  add_common(train, train_opts);

  std::string model_path, predict_input;
  bool as_manifest = false;
  auto* pred = app.add_subcommand("predict", "Classify a point-set CSV or every entry of a manifest");
  pred->add_option("model", model_path, "Model file")->required();
  pred->add_option("input", predict_input, "Point-set CSV or manifest")->required();
  pred->add_flag("--manifest", as_manifest, "Treat input as a manifest");
  add_common(pred, predict_opts);

  auto* curve = app.add_subcommand("curve", "Accuracy vs training-set size for every method");
  add_common(curve, curve_opts);
  auto* ood = app.add_subcommand("ood", "Matched vs out-of-distribution accuracy for every method");
  add_common(ood, ood_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen(gen_opts);
    if (*train) return cmd_train(train_opts, train_manifest);
    if (*pred) return cmd_predict(predict_opts, model_path, predict_input, as_manifest);
    if (*curve) return cmd_curve(curve_opts);
    if (*ood) return cmd_ood(ood_opts);
  } catch (const Error& e) {
    std::cerr << "lotsub: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "lotsub: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
