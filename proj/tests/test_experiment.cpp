#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "helpers.hpp"
#include "lotsub/experiment.hpp"

namespace fs = std::filesystem;
using namespace lotsub;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("lotsub_exp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg = parse_experiment_config(
      "classes = 3\npoints = 24\nn_train = 4\nn_test = 5\nsplits = 1, 2, 4\nrepeats = 2\nseed = 7\n"
      "lr_iters = 50\n");
  return cfg;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_experiment_config(
      "# comment line\n"
      "classes = 4   # trailing comment\n"
      "points=32\n"
      "translate_max = 0.5\n"
      "ood_factor = 3\n"
      "ood_jitter_std = 0.2\n"
      "methods = lot, cov-lr\n"
      "splits = 1,2\n"
      "flags = T,S\n"
      "out = runs/a\n",
      "/base");
  CHECK(cfg.classes == 4);
  CHECK(cfg.points == 32);
  CHECK(cfg.deform_in.translate_max == 0.5);
  CHECK(cfg.deform_out.translate_max == doctest::Approx(1.5));
  CHECK(cfg.deform_out.scale_max == doctest::Approx(std::pow(cfg.deform_in.scale_max, 3.0)));
  CHECK(cfg.deform_out.jitter_std == 0.2);
  CHECK(cfg.methods == std::vector<std::string>{"lot", "cov-lr"});
  CHECK(cfg.splits == std::vector<int>{1, 2});
  CHECK(cfg.flags.translation);
  CHECK_FALSE(cfg.flags.aniso_scale);
  CHECK(cfg.flags.shear);
  CHECK(cfg.out == fs::path("/base/runs/a"));

  CHECK(parse_experiment_config("out = /abs/x\n", "/base").out == fs::path("/abs/x"));
}

TEST_CASE("config errors") {
  CHECK(kind_of([] { parse_experiment_config("colour = red\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_experiment_config("classes 4\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_experiment_config("classes = four\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_experiment_config("variance = 1.5\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_experiment_config("methods = lot, knn\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_experiment_config("flags = T,X\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_experiment_config("ood_factor = 0\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_experiment_config("source = manifest\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_experiment_config("n_train = 2\nsplits = 1,4\n"); }) == ErrorKind::InfeasibleSplit);
  CHECK(kind_of([] { load_experiment_config("/nonexistent/lotsub.cfg"); }) == ErrorKind::ConfigError);
}

TEST_CASE("all_methods lists the proposed method first and parses every name") {
  const auto methods = all_methods();
  REQUIRE(methods.size() == 11);
  CHECK(methods.front() == kProposedMethod);
  CHECK(std::set<std::string>(methods.begin(), methods.end()).size() == methods.size());
  ExperimentConfig cfg;
  cfg.methods = methods;
  CHECK_NOTHROW(cfg.check());
}

TEST_CASE("subsample_per_class") {
  const auto cfg = tiny_config();
  const auto data = prepare_data(cfg, false);
  const auto sub = subsample_per_class(data.train, 2, 11);
  CHECK(sub.size() == 6);
  for (int k = 0; k < 3; ++k) CHECK(sub.indices_of(k).size() == 2);
  const auto again = subsample_per_class(data.train, 2, 11);
  for (std::size_t i = 0; i < sub.size(); ++i) CHECK(sub.samples[i].points == again.samples[i].points);
  // Every drawn sample comes from the pool.
  for (const auto& s : sub.samples) {
    bool found = false;
    for (const auto& p : data.train.samples) found = found || (p.label == s.label && p.points == s.points);
    CHECK(found);
  }
  CHECK(kind_of([&] { subsample_per_class(data.train, 5, 1); }) == ErrorKind::InfeasibleSplit);
  CHECK(kind_of([&] { subsample_per_class(data.train, 0, 1); }) == ErrorKind::InfeasibleSplit);
}

TEST_CASE("run_curve: one row per method, split and repeat; reproducible") {
  const auto cfg = tiny_config();
  const auto data = prepare_data(cfg, false);
  const auto rows = run_curve(cfg, data);
  CHECK(rows.size() == all_methods().size() * 3 * 2);
  for (const auto& r : rows) {
    CHECK(r.total == 15);
    CHECK(r.accuracy == doctest::Approx(static_cast<double>(r.correct) / r.total));
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
  }
  const auto again = run_curve(cfg, prepare_data(cfg, false));
  REQUIRE(again.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].method == again[i].method);
    CHECK(rows[i].split_size == again[i].split_size);
    CHECK(rows[i].correct == again[i].correct);
  }

  TempDir a, b;
  ExperimentConfig ca = cfg, cb = cfg;
  ca.out = a.path;
  cb.out = b.path;
  write_curve_outputs(ca, rows);
  write_curve_outputs(cb, again);
  for (const char* f : {"results.csv", "summary.csv", "curve.svg", "timings.csv"}) CHECK(fs::exists(a.path / f));
  CHECK(read_text(a.path / "results.csv") == read_text(b.path / "results.csv"));
  CHECK(read_text(a.path / "summary.csv") == read_text(b.path / "summary.csv"));
  CHECK(read_text(a.path / "curve.svg") == read_text(b.path / "curve.svg"));
  CHECK(read_text(a.path / "curve.svg").rfind("<svg", 0) == 0);
}

TEST_CASE("OOD with identical deformations equals the matched evaluation") {
  auto cfg = tiny_config();
  cfg.splits = {2};
  cfg.repeats = 1;
  cfg.methods = {"lot", "cov-lr", "fsort-ns"};
  cfg.deform_out = cfg.deform_in;
  const auto data = prepare_data(cfg, true);
  REQUIRE(data.test_ood.size() == data.test.size());
  for (std::size_t i = 0; i < data.test.size(); ++i) {
    CHECK(data.test.samples[i].points == data.test_ood.samples[i].points);
  }
  const auto curve = run_curve(cfg, data);
  const auto ood = run_ood(cfg, data);
  REQUIRE(curve.size() == ood.size());
  for (std::size_t i = 0; i < ood.size(); ++i) {
    CHECK(ood[i].method == curve[i].method);
    CHECK(ood[i].matched_accuracy == curve[i].accuracy);
    CHECK(ood[i].ood_accuracy == ood[i].matched_accuracy);
    CHECK(ood[i].drop == 0.0);
  }
  TempDir d;
  cfg.out = d.path;
  write_ood_outputs(cfg, ood);
  for (const char* f : {"ood_results.csv", "ood_summary.csv", "ood.svg"}) CHECK(fs::exists(d.path / f));
}

TEST_CASE("OOD needs a prepared out-of-distribution set") {
  auto cfg = tiny_config();
  cfg.splits = {1};
  cfg.repeats = 1;
  const auto data = prepare_data(cfg, false);
  CHECK(kind_of([&] { run_ood(cfg, data); }) == ErrorKind::ConfigError);
}

TEST_CASE("every method sees the same training subsample") {
  auto cfg = tiny_config();
  cfg.splits = {4};
  cfg.repeats = 1;
  const auto data = prepare_data(cfg, false);
  const auto rows = run_curve(cfg, data);
  // With the full pool each split draws all samples, so the proposed method fits the training set.
  const auto scores = evaluate_methods(data.train, {&data.train}, {"lot"}, cfg, 3);
  REQUIRE(scores.size() == 1);
  CHECK(scores[0].correct[0] == static_cast<int>(data.train.size()));
  CHECK(rows.size() == all_methods().size());
}
