#include "lotsub/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "lotsub/io.hpp"
#include "lotsub/svg.hpp"

namespace fs = std::filesystem;

namespace lotsub {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string trimmed(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trimmed(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void config_fail(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

double to_real(const std::string& key, const std::string& value) {
  const auto v = parse_real(value);
  if (!v || !std::isfinite(*v)) config_fail("key '" + key + "' needs a real number, got '" + value + "'");
  return *v;
}

long long to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    config_fail("key '" + key + "' needs an integer, got '" + value + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used, 0);
    if (used != value.size() || value.front() == '-') throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    config_fail("key '" + key + "' needs a non-negative integer, got '" + value + "'");
  }
}

// Baseline method "<embedding>-<classifier>".
struct BaselineSpec {
  SetEmbeddingKind kind;
  double gem_power = 1.0;
  bool nearest_subspace = false;
};

std::optional<BaselineSpec> parse_baseline(const std::string& method) {
  const std::size_t dash = method.rfind('-');
  if (dash == std::string::npos) return std::nullopt;
  const std::string emb = method.substr(0, dash), clf = method.substr(dash + 1);
  BaselineSpec spec{SetEmbeddingKind::Gem};
  if (clf == "ns") {
    spec.nearest_subspace = true;
  } else if (clf != "lr") {
    return std::nullopt;
  }
  if (emb == "gem1" || emb == "gem2" || emb == "gem4") {
    spec.kind = SetEmbeddingKind::Gem;
    spec.gem_power = static_cast<double>(emb.back() - '0');
  } else if (emb == "cov") {
    spec.kind = SetEmbeddingKind::CovPool;
  } else if (emb == "fsort") {
    spec.kind = SetEmbeddingKind::FSort;
  } else {
    return std::nullopt;
  }
  return spec;
}

FlatVector embed(const BaselineSpec& spec, const PointSet& p, const ExperimentConfig& cfg) {
  switch (spec.kind) {
    case SetEmbeddingKind::Gem: return gem_embed(p, spec.gem_power).vector;
    case SetEmbeddingKind::CovPool: return cov_embed(p).vector;
    case SetEmbeddingKind::FSort: return fsort_embed(p, cfg.fsort_k).vector;
  }
  return {};
}

std::vector<std::string> effective_methods(const ExperimentConfig& cfg) {
  return cfg.methods.empty() ? all_methods() : cfg.methods;
}

std::uint64_t trial_key(int split, int repeat) {
  return static_cast<std::uint64_t>(split) * 1000003ULL + static_cast<std::uint64_t>(repeat);
}

struct Stats {
  double mean = 0.0;
  double std = 0.0;
};

Stats stats_of(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

// Runs every (split, repeat) trial on the same subsample for all methods.
template <typename Visit>
void for_each_trial(const ExperimentConfig& cfg, const ExperimentData& data,
                    const std::vector<const LabeledDataset*>& eval_sets, Visit&& visit) {
  for (int split : cfg.splits) {
    for (int rep = 0; rep < cfg.repeats; ++rep) {
      const std::uint64_t key = trial_key(split, rep);
      const LabeledDataset sub = subsample_per_class(data.train, split, derive_seed(cfg.seed, "split", key));
      const auto scores =
          evaluate_methods(sub, eval_sets, effective_methods(cfg), cfg, derive_seed(cfg.seed, "model", key));
      for (const auto& s : scores) visit(split, rep, s);
    }
  }
}

}  // namespace

std::vector<std::string> all_methods() {
  std::vector<std::string> out = {kProposedMethod};
  for (const char* emb : {"gem1", "gem2", "gem4", "cov", "fsort"}) {
    for (const char* clf : {"lr", "ns"}) out.push_back(std::string(emb) + "-" + clf);
  }
  return out;
}

void ExperimentConfig::check() const {
  if (source != "synthetic" && source != "manifest") config_fail("source must be 'synthetic' or 'manifest'");
  if (source == "manifest" && (train_manifest.empty() || test_manifest.empty())) {
    config_fail("manifest source needs train_manifest and test_manifest");
  }
  if (classes < 1) config_fail("classes must be >= 1");
  if (points < 1) config_fail("points must be >= 1");
  if (n_train < 1 || n_test < 1) config_fail("n_train and n_test must be >= 1");
  if (repeats < 1) config_fail("repeats must be >= 1");
  if (splits.empty()) config_fail("splits must list at least one size");
  for (int s : splits) {
    if (s < 1) config_fail("split sizes must be positive");
    if (source == "synthetic" && s > n_train) {
      throw Error(ErrorKind::InfeasibleSplit,
                  "split size " + std::to_string(s) + " exceeds the training pool of " + std::to_string(n_train));
    }
  }
  if (!(variance > 0.0 && variance <= 1.0)) config_fail("variance must lie in (0, 1]");
  if (!(reference_jitter >= 0.0)) config_fail("reference_jitter must be >= 0");
  if (fsort_k < 2) config_fail("fsort_k must be >= 2");
  if (linear.iterations < 0 || !(linear.learning_rate > 0.0) || !(linear.l2 >= 0.0)) config_fail("bad logistic-regression settings");
  try {
    deform_in.check();
    deform_out.check();
  } catch (const Error& e) {
    config_fail(e.what());
  }
  for (const auto& m : methods) {
    if (m != kProposedMethod && !parse_baseline(m)) config_fail("unknown method '" + m + "'");
  }
}

ExperimentConfig parse_experiment_config(const std::string& text, const fs::path& base_dir) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trimmed(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) config_fail("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trimmed(line.substr(0, eq));
    const std::string value = trimmed(line.substr(eq + 1));
    if (key.empty() || value.empty()) config_fail("line " + std::to_string(line_no) + ": empty key or value");
    kv[key] = value;
  }

  const auto path_of = [&](const std::string& v) {
    const fs::path p(v);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };

  double ood_factor = 2.0;
  std::map<std::string, double> ood_overrides;
  for (const auto& [key, value] : kv) {
    if (key == "source") cfg.source = value;
    else if (key == "train_manifest") cfg.train_manifest = path_of(value);
    else if (key == "test_manifest") cfg.test_manifest = path_of(value);
    else if (key == "target_n") {
      const long long n = to_int(key, value);
      if (n < 1) config_fail("target_n must be >= 1");
      cfg.target_n = static_cast<std::size_t>(n);
    }
    else if (key == "templates") cfg.templates = value == "builtin" ? value : path_of(value).string();
    else if (key == "classes") cfg.classes = static_cast<int>(to_int(key, value));
    else if (key == "points") {
      const long long n = to_int(key, value);
      if (n < 1) config_fail("points must be >= 1");
      cfg.points = static_cast<std::size_t>(n);
    }
    else if (key == "n_train") cfg.n_train = static_cast<int>(to_int(key, value));
    else if (key == "n_test") cfg.n_test = static_cast<int>(to_int(key, value));
    else if (key == "translate_max") cfg.deform_in.translate_max = to_real(key, value);
    else if (key == "scale_max") cfg.deform_in.scale_max = to_real(key, value);
    else if (key == "shear_max") cfg.deform_in.shear_max = to_real(key, value);
    else if (key == "jitter_std") cfg.deform_in.jitter_std = to_real(key, value);
    else if (key == "ood_factor") ood_factor = to_real(key, value);
    else if (key == "ood_translate_max" || key == "ood_scale_max" || key == "ood_shear_max" || key == "ood_jitter_std") {
      ood_overrides[key] = to_real(key, value);
    }
    else if (key == "methods") cfg.methods = split_list(value);
    else if (key == "splits") {
      cfg.splits.clear();
      for (const auto& s : split_list(value)) cfg.splits.push_back(static_cast<int>(to_int(key, s)));
    }
    else if (key == "repeats") cfg.repeats = static_cast<int>(to_int(key, value));
    else if (key == "seed") cfg.seed = to_u64(key, value);
    else if (key == "flags") cfg.flags = InvarianceFlags::parse(value);
    else if (key == "variance") cfg.variance = to_real(key, value);
    else if (key == "reference_jitter") cfg.reference_jitter = to_real(key, value);
    else if (key == "lr_rate") cfg.linear.learning_rate = to_real(key, value);
    else if (key == "lr_l2") cfg.linear.l2 = to_real(key, value);
    else if (key == "lr_iters") cfg.linear.iterations = static_cast<int>(to_int(key, value));
    else if (key == "fsort_k") cfg.fsort_k = static_cast<std::size_t>(std::max<long long>(0, to_int(key, value)));
    else if (key == "out") cfg.out = path_of(value);
    else config_fail("unknown config key '" + key + "'");
  }
  if (!(ood_factor > 0.0)) config_fail("ood_factor must be positive");
  cfg.deform_out = cfg.deform_in.scaled(ood_factor);
  for (const auto& [key, v] : ood_overrides) {
    if (key == "ood_translate_max") cfg.deform_out.translate_max = v;
    if (key == "ood_scale_max") cfg.deform_out.scale_max = v;
    if (key == "ood_shear_max") cfg.deform_out.shear_max = v;
    if (key == "ood_jitter_std") cfg.deform_out.jitter_std = v;
  }
  cfg.check();
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path.parent_path());
}

std::vector<PointSet> load_templates(const ExperimentConfig& cfg) {
  if (cfg.templates == "builtin") {
    return builtin_templates(cfg.classes, cfg.points, derive_seed(cfg.seed, "templates"));
  }
  std::vector<PointSet> out;
  for (int k = 0; k < cfg.classes; ++k) {
    const fs::path p = fs::path(cfg.templates) / ("class_" + std::to_string(k) + ".csv");
    if (!fs::exists(p)) throw Error(ErrorKind::MissingFile, "template " + p.string());
    out.push_back(resample_to(read_pointset_csv(p), cfg.points, derive_seed(cfg.seed, "template-resample", static_cast<std::uint64_t>(k))));
  }
  return out;
}

ExperimentData prepare_data(const ExperimentConfig& cfg, bool with_ood) {
  ExperimentData data;
  if (cfg.source == "manifest") {
    data.train = load_dataset(cfg.train_manifest, cfg.target_n, derive_seed(cfg.seed, "ingest", 0));
    data.test = load_dataset(cfg.test_manifest, cfg.target_n, derive_seed(cfg.seed, "ingest", 1));
    if (with_ood) config_fail("out-of-distribution runs need synthetic data (deformation magnitudes must be controlled)");
    return data;
  }
  const auto templates = load_templates(cfg);
  data.train = synth_split(templates, cfg.n_train, cfg.deform_in, cfg.seed, "train");
  data.test = synth_split(templates, cfg.n_test, cfg.deform_in, cfg.seed, "test");
  if (with_ood) data.test_ood = synth_split(templates, cfg.n_test, cfg.deform_out, cfg.seed, "test");
  return data;
}

LabeledDataset subsample_per_class(const LabeledDataset& pool, int per_class, std::uint64_t seed) {
  if (per_class < 1) throw Error(ErrorKind::InfeasibleSplit, "split size must be >= 1");
  std::vector<std::size_t> keep;
  for (int k = 0; k < pool.num_classes; ++k) {
    std::vector<std::size_t> idx = pool.indices_of(k);
    if (static_cast<int>(idx.size()) < per_class) {
      throw Error(ErrorKind::InfeasibleSplit, "class " + std::to_string(k) + " has " + std::to_string(idx.size()) +
                                                  " samples, split needs " + std::to_string(per_class));
    }
    Rng rng(derive_seed(seed, "class", static_cast<std::uint64_t>(k)));
    for (std::size_t i = 0; i < static_cast<std::size_t>(per_class); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    keep.insert(keep.end(), idx.begin(), idx.begin() + per_class);
  }
  std::sort(keep.begin(), keep.end());
  LabeledDataset out;
  out.num_classes = pool.num_classes;
  for (std::size_t i : keep) out.samples.push_back(pool.samples[i]);
  return out;
}

std::vector<MethodScore> evaluate_methods(const LabeledDataset& train,
                                          const std::vector<const LabeledDataset*>& eval_sets,
                                          const std::vector<std::string>& methods, const ExperimentConfig& cfg,
                                          std::uint64_t seed) {
  std::vector<MethodScore> out;
  std::vector<int> train_labels;
  for (const auto& s : train.samples) train_labels.push_back(s.label);

  for (const auto& method : methods) {
    MethodScore score{method, {}, static_cast<int>(train.size()), 0.0, 0.0};
    auto t0 = Clock::now();
    if (method == kProposedMethod) {
      const LotNsModel model = train_model(train, cfg, seed);
      score.train_seconds = seconds_since(t0);
      t0 = Clock::now();
      for (const LabeledDataset* set : eval_sets) {
        int correct = 0;
        for (const auto& s : set->samples) correct += predict(s.points, model).label == s.label ? 1 : 0;
        score.correct.push_back(correct);
      }
    } else {
      const auto spec = parse_baseline(method);
      if (!spec) config_fail("unknown method '" + method + "'");
      std::vector<FlatVector> xs;
      for (const auto& s : train.samples) xs.push_back(embed(*spec, s.points, cfg));
      std::optional<NsClassifier> ns;
      std::optional<LinearClassifier> lr;
      if (spec->nearest_subspace) {
        ns = ns_on_embeddings(xs, train_labels, train.num_classes, cfg.variance);
      } else {
        lr = fit_linear(xs, train_labels, train.num_classes, cfg.linear);
      }
      score.train_seconds = seconds_since(t0);
      t0 = Clock::now();
      for (const LabeledDataset* set : eval_sets) {
        int correct = 0;
        for (const auto& s : set->samples) {
          const FlatVector x = embed(*spec, s.points, cfg);
          const int label = ns ? predict_ns(*ns, x) : predict_linear(*lr, x);
          correct += label == s.label ? 1 : 0;
        }
        score.correct.push_back(correct);
      }
    }
    score.test_seconds = seconds_since(t0);
    out.push_back(std::move(score));
  }
  return out;
}

LotNsModel train_model(const LabeledDataset& train, const ExperimentConfig& cfg, std::uint64_t seed) {
  return lotsub::train(train, TrainConfig{cfg.flags, cfg.variance, cfg.reference_jitter, seed});
}

std::vector<ResultRow> run_curve(const ExperimentConfig& cfg, const ExperimentData& data) {
  cfg.check();
  std::vector<ResultRow> rows;
  const int total = static_cast<int>(data.test.size());
  for_each_trial(cfg, data, {&data.test}, [&](int split, int rep, const MethodScore& s) {
    rows.push_back({s.method, split, rep, s.correct[0], total, static_cast<double>(s.correct[0]) / total,
                    s.train_seconds, s.test_seconds});
  });
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.method, a.split_size, a.repeat_index) < std::tie(b.method, b.split_size, b.repeat_index);
  });
  return rows;
}

std::vector<OodRow> run_ood(const ExperimentConfig& cfg, const ExperimentData& data) {
  cfg.check();
  if (data.test_ood.samples.empty()) config_fail("no out-of-distribution test set prepared");
  std::vector<OodRow> rows;
  const double n_matched = static_cast<double>(data.test.size());
  const double n_ood = static_cast<double>(data.test_ood.size());
  for_each_trial(cfg, data, {&data.test, &data.test_ood}, [&](int split, int rep, const MethodScore& s) {
    const double matched = s.correct[0] / n_matched, ood = s.correct[1] / n_ood;
    rows.push_back({s.method, split, rep, matched, ood, matched - ood});
  });
  std::sort(rows.begin(), rows.end(), [](const OodRow& a, const OodRow& b) {
    return std::tie(a.method, a.split_size, a.repeat_index) < std::tie(b.method, b.split_size, b.repeat_index);
  });
  return rows;
}

void write_curve_outputs(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
  std::string results = "method,split_size,repeat,correct,total,accuracy\n";
  std::string timings = "method,split_size,repeat,train_seconds,test_seconds\n";
  std::map<std::pair<std::string, int>, std::vector<double>> groups;
  for (const auto& r : rows) {
    results += r.method + "," + std::to_string(r.split_size) + "," + std::to_string(r.repeat_index) + "," +
               std::to_string(r.correct) + "," + std::to_string(r.total) + "," + format_real(r.accuracy) + "\n";
    timings += r.method + "," + std::to_string(r.split_size) + "," + std::to_string(r.repeat_index) + "," +
               format_real(r.train_seconds) + "," + format_real(r.test_seconds) + "\n";
    groups[{r.method, r.split_size}].push_back(r.accuracy);
  }
  std::string summary = "method,split_size,repeats,mean_accuracy,std_accuracy\n";
  std::map<std::string, Series> series;
  for (const auto& [key, accs] : groups) {
    const Stats st = stats_of(accs);
    summary += key.first + "," + std::to_string(key.second) + "," + std::to_string(accs.size()) + "," +
               format_real(st.mean) + "," + format_real(st.std) + "\n";
    auto& s = series[key.first];
    s.name = key.first;
    s.x.push_back(key.second);
    s.y.push_back(st.mean);
  }
  std::vector<Series> plot;
  for (auto& [name, s] : series) plot.push_back(std::move(s));
  write_file_atomic(cfg.out / "results.csv", results);
  write_file_atomic(cfg.out / "timings.csv", timings);
  write_file_atomic(cfg.out / "summary.csv", summary);
  write_file_atomic(cfg.out / "curve.svg",
                    line_chart_svg(plot, "Test accuracy vs training samples per class", "training samples per class",
                                   "mean test accuracy"));
}

void write_ood_outputs(const ExperimentConfig& cfg, const std::vector<OodRow>& rows) {
  std::string results = "method,split_size,repeat,matched_accuracy,ood_accuracy,drop\n";
  std::map<std::pair<std::string, int>, std::vector<const OodRow*>> groups;
  for (const auto& r : rows) {
    results += r.method + "," + std::to_string(r.split_size) + "," + std::to_string(r.repeat_index) + "," +
               format_real(r.matched_accuracy) + "," + format_real(r.ood_accuracy) + "," + format_real(r.drop) + "\n";
    groups[{r.method, r.split_size}].push_back(&r);
  }
  std::string summary = "method,split_size,repeats,mean_matched_accuracy,mean_ood_accuracy,mean_drop,std_drop\n";
  std::map<std::string, Series> series;
  for (const auto& [key, members] : groups) {
    std::vector<double> matched, ood, drop;
    for (const OodRow* r : members) {
      matched.push_back(r->matched_accuracy);
      ood.push_back(r->ood_accuracy);
      drop.push_back(r->drop);
    }
    const Stats sd = stats_of(drop);
    summary += key.first + "," + std::to_string(key.second) + "," + std::to_string(members.size()) + "," +
               format_real(stats_of(matched).mean) + "," + format_real(stats_of(ood).mean) + "," +
               format_real(sd.mean) + "," + format_real(sd.std) + "\n";
    auto& s = series[key.first];
    s.name = key.first;
    s.x.push_back(key.second);
    s.y.push_back(stats_of(ood).mean);
  }
  std::vector<Series> plot;
  for (auto& [name, s] : series) plot.push_back(std::move(s));
  write_file_atomic(cfg.out / "ood_results.csv", results);
  write_file_atomic(cfg.out / "ood_summary.csv", summary);
  write_file_atomic(cfg.out / "ood.svg",
                    line_chart_svg(plot, "Out-of-distribution test accuracy", "training samples per class",
                                   "mean test accuracy"));
}

}  // namespace lotsub
