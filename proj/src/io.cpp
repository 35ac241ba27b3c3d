#include "lotsub/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "lotsub/deform.hpp"

namespace fs = std::filesystem;

namespace lotsub {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(fs::exists(path) ? ErrorKind::IoError : ErrorKind::MissingFile, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string row_text(const double* values, Eigen::Index count) {
  std::string line;
  for (Eigen::Index d = 0; d < count; ++d) {
    if (d > 0) line += ',';
    line += format_real(values[d]);
  }
  line += '\n';
  return line;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what);
}

// Cursor over model-file lines with line-numbered errors.
class LineReader {
 public:
  explicit LineReader(std::vector<std::string_view> lines) : lines_(std::move(lines)) {}

  std::string_view next() {
    if (pos_ >= lines_.size()) parse_fail(pos_ + 1, "unexpected end of model file");
    return lines_[pos_++];
  }
  std::size_t line_no() const { return pos_; }

  // "key value" line; returns value.
  std::string_view keyed(std::string_view key) {
    const std::string_view line = next();
    if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != ' ') {
      parse_fail(pos_, "expected '" + std::string(key) + " <value>'");
    }
    return trim(line.substr(key.size() + 1));
  }

  std::size_t keyed_size(std::string_view key) {
    const std::string_view v = keyed(key);
    std::size_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) parse_fail(pos_, "bad integer for " + std::string(key));
    return out;
  }

  double keyed_real(std::string_view key) {
    const auto v = parse_real(keyed(key));
    if (!v) parse_fail(pos_, "bad real for " + std::string(key));
    return *v;
  }

  void expect(std::string_view literal) {
    if (next() != literal) parse_fail(pos_, "expected '" + std::string(literal) + "'");
  }

  void read_row(double* out, std::size_t count) {
    const auto fields = split(next(), ',');
    if (fields.size() != count) parse_fail(pos_, "expected " + std::to_string(count) + " values");
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = parse_real(fields[i]);
      if (!v) parse_fail(pos_, "bad real '" + std::string(fields[i]) + "'");
      out[i] = *v;
    }
  }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

const std::string kModelMagic = "lotsub-model";

}  // namespace

std::string format_real(double x) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  if (ec != std::errc()) throw Error(ErrorKind::IoError, "cannot format real");
  return std::string(buf, end);
}

std::optional<double> parse_real(std::string_view token) {
  token = trim(token);
  if (token.empty()) return std::nullopt;
  if (token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || p != token.data() + token.size()) return std::nullopt;
  return v;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot rename into " + path.string() + ": " + ec.message());
}

PointSet read_pointset_csv(const fs::path& path) {
  const std::string text = read_file(path);
  const auto lines = lines_of(text);
  std::vector<double> values;
  std::size_t cols = 0, rows = 0;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string_view line = trim(lines[ln]);
    if (ln == 0 && !line.empty() && line.front() == '#') continue;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (cols == 0) {
      cols = fields.size();
    } else if (fields.size() != cols) {
      throw Error(ErrorKind::RaggedRows, path.string() + " line " + std::to_string(ln + 1) + ": expected " +
                                             std::to_string(cols) + " values, found " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      const auto v = parse_real(f);
      if (!v) {
        throw Error(ErrorKind::ParseError,
                    path.string() + " line " + std::to_string(ln + 1) + ": bad number '" + std::string(f) + "'");
      }
      values.push_back(*v);
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorKind::EmptyFile, path.string() + " has no data rows");
  RowMatrix m = Eigen::Map<RowMatrix>(values.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  return PointSet(std::move(m));
}

void write_pointset_csv(const PointSet& p, const fs::path& path) {
  std::string text;
  const RowMatrix& m = p.points();
  for (Eigen::Index i = 0; i < m.rows(); ++i) text += row_text(m.row(i).data(), m.cols());
  write_file_atomic(path, text);
}

std::vector<ManifestEntry> read_manifest(const fs::path& manifest_path) {
  const std::string text = read_file(manifest_path);
  std::vector<ManifestEntry> out;
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string_view line = trim(lines[ln]);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorKind::ParseError, manifest_path.string() + " line " + std::to_string(ln + 1) + ": expected 'label,path'");
    }
    const std::string_view label_text = trim(line.substr(0, comma));
    int label = -1;
    const auto [p, ec] = std::from_chars(label_text.data(), label_text.data() + label_text.size(), label);
    if (ec != std::errc() || p != label_text.data() + label_text.size() || label < 0) {
      throw Error(ErrorKind::ParseError, manifest_path.string() + " line " + std::to_string(ln + 1) + ": bad label");
    }
    const std::string_view rel = trim(line.substr(comma + 1));
    if (rel.empty()) throw Error(ErrorKind::ParseError, manifest_path.string() + " line " + std::to_string(ln + 1) + ": empty path");
    out.push_back({label, fs::path(std::string(rel))});
  }
  return out;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const fs::path& manifest_path) {
  std::string text = "# label,path\n";
  for (const auto& e : entries) text += std::to_string(e.class_label) + "," + e.path.generic_string() + "\n";
  write_file_atomic(manifest_path, text);
}

PointSet resample_to(const PointSet& p, std::size_t target_n, std::uint64_t seed) {
  if (target_n == 0) throw Error(ErrorKind::InvalidArgument, "target cardinality must be >= 1");
  const std::size_t n = p.size();
  if (n == target_n) return p;
  Rng rng(seed);
  const auto l = static_cast<Eigen::Index>(p.dim());
  RowMatrix out(static_cast<Eigen::Index>(target_n), l);
  if (n > target_n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < target_n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(target_n);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < target_n; ++i) {
      out.row(static_cast<Eigen::Index>(i)) = p.points().row(static_cast<Eigen::Index>(idx[i]));
    }
  } else {
    const Eigen::RowVectorXd extent = p.points().colwise().maxCoeff() - p.points().colwise().minCoeff();
    const double sigma = 1e-6 * extent.norm();
    out.topRows(static_cast<Eigen::Index>(n)) = p.points();
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i = n; i < target_n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      out.row(row) = p.points().row(static_cast<Eigen::Index>(pick(rng)));
      for (Eigen::Index d = 0; d < l; ++d) out(row, d) += sigma * noise(rng);
    }
  }
  return PointSet(std::move(out));
}

LabeledDataset load_dataset(const fs::path& manifest_path, std::optional<std::size_t> target_n, std::uint64_t seed) {
  const auto entries = read_manifest(manifest_path);
  if (entries.empty()) throw Error(ErrorKind::EmptyFile, manifest_path.string() + " lists no samples");
  const fs::path base = manifest_path.parent_path();
  LabeledDataset ds;
  int max_label = -1;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const fs::path full = e.path.is_absolute() ? e.path : base / e.path;
    if (!fs::exists(full)) throw Error(ErrorKind::MissingFile, full.string());
    PointSet p = read_pointset_csv(full);
    if (target_n) p = resample_to(p, *target_n, derive_seed(seed, "resample", i));
    ds.samples.push_back({std::move(p), e.class_label});
    max_label = std::max(max_label, e.class_label);
  }
  ds.num_classes = max_label + 1;
  std::vector<bool> present(static_cast<std::size_t>(ds.num_classes), false);
  for (const auto& s : ds.samples) present[static_cast<std::size_t>(s.label)] = true;
  for (int k = 0; k < ds.num_classes; ++k) {
    if (!present[static_cast<std::size_t>(k)]) {
      throw Error(ErrorKind::LabelGap, manifest_path.string() + ": labels must cover 0..K-1, missing " + std::to_string(k));
    }
  }
  ds.check(true);
  return ds;
}

fs::path write_dataset(const LabeledDataset& dataset, const fs::path& dir, const std::string& split_name) {
  std::vector<ManifestEntry> entries;
  std::map<int, int> counters;
  for (const auto& s : dataset.samples) {
    const int j = counters[s.label]++;
    char name[64];
    std::snprintf(name, sizeof(name), "sample_%04d.csv", j);
    const fs::path rel = fs::path(split_name) / ("class_" + std::to_string(s.label)) / name;
    write_pointset_csv(s.points, dir / rel);
    entries.push_back({s.label, rel});
  }
  const fs::path manifest = dir / (split_name + "_manifest.csv");
  write_manifest(entries, manifest);
  return manifest;
}

std::string serialize_model(const LotNsModel& model) {
  std::string body = kModelMagic + " v" + std::to_string(kModelFormatVersion) + "\n";
  body += "N " + std::to_string(model.num_points) + "\n";
  body += "L " + std::to_string(model.dim) + "\n";
  body += "K " + std::to_string(model.classes.size()) + "\n";
  body += "flags " + model.flags.str() + "\n";
  body += "variance " + format_real(model.variance_fraction) + "\n";
  for (const auto& cls : model.classes) {
    body += "class " + std::to_string(cls.class_label) + "\n";
    body += "explained " + format_real(cls.explained_variance_fraction) + "\n";
    body += "reference\n";
    const RowMatrix& ref = cls.reference.points();
    for (Eigen::Index i = 0; i < ref.rows(); ++i) body += row_text(ref.row(i).data(), ref.cols());
    body += "basis " + std::to_string(cls.basis.cols()) + "\n";
    const RowMatrix b = cls.basis;  // row-major so each line is one basis row
    for (Eigen::Index i = 0; i < b.rows(); ++i) body += row_text(b.row(i).data(), b.cols());
  }
  body += "checksum " + hex64(fnv1a(body)) + "\n";
  return body;
}

LotNsModel deserialize_model(const std::string& text) {
  const std::size_t first_nl = text.find('\n');
  const std::string_view header = trim(std::string_view(text).substr(0, first_nl));
  const bool has_magic = header.substr(0, kModelMagic.size() + 1) == kModelMagic + " ";
  const std::string expected_version = "v" + std::to_string(kModelFormatVersion);
  if (has_magic && header.substr(kModelMagic.size() + 1) != expected_version) {
    throw Error(ErrorKind::VersionMismatch, "model format '" + std::string(header.substr(kModelMagic.size() + 1)) +
                                                "', this build reads " + expected_version);
  }

  const std::size_t tail = text.rfind("checksum ");
  if (tail == std::string::npos || (tail > 0 && text[tail - 1] != '\n')) {
    throw Error(has_magic ? ErrorKind::ChecksumMismatch : ErrorKind::ParseError,
                has_magic ? "missing checksum line" : "not a lotsub model file");
  }
  const std::string_view body = std::string_view(text).substr(0, tail);
  std::string_view stored = std::string_view(text).substr(tail + 9);
  if (!stored.empty() && stored.back() == '\n') stored.remove_suffix(1);
  if (trim(stored) != hex64(fnv1a(body))) {
    throw Error(ErrorKind::ChecksumMismatch, "model file content does not match its checksum");
  }
  if (!has_magic) throw Error(ErrorKind::ParseError, "not a lotsub model file");

  LineReader in(lines_of(body));
  in.next();  // header
  LotNsModel model;
  model.num_points = in.keyed_size("N");
  model.dim = in.keyed_size("L");
  const std::size_t k = in.keyed_size("K");
  model.flags = InvarianceFlags::parse(std::string(in.keyed("flags")));
  model.variance_fraction = in.keyed_real("variance");
  const std::size_t n = model.num_points, l = model.dim;
  if (n == 0 || l == 0 || k == 0) parse_fail(in.line_no(), "N, L and K must be positive");
  for (std::size_t c = 0; c < k; ++c) {
    ClassSubspace cls{static_cast<int>(in.keyed_size("class")), PointSet(RowMatrix::Zero(1, 1)), {}, 0.0};
    if (cls.class_label != static_cast<int>(c)) parse_fail(in.line_no(), "classes must appear in order 0..K-1");
    cls.explained_variance_fraction = in.keyed_real("explained");
    in.expect("reference");
    RowMatrix ref(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l));
    for (std::size_t i = 0; i < n; ++i) in.read_row(ref.row(static_cast<Eigen::Index>(i)).data(), l);
    cls.reference = PointSet(std::move(ref));
    const std::size_t m = in.keyed_size("basis");
    RowMatrix b(static_cast<Eigen::Index>(n * l), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < n * l; ++i) in.read_row(b.row(static_cast<Eigen::Index>(i)).data(), m);
    cls.basis = b;
    if (orthonormality_defect(cls.basis) > 1e-8) parse_fail(in.line_no(), "basis of class " + std::to_string(c) + " is not orthonormal");
    model.classes.push_back(std::move(cls));
  }
  return model;
}

void save_model(const LotNsModel& model, const fs::path& path) { write_file_atomic(path, serialize_model(model)); }

LotNsModel load_model(const fs::path& path) { return deserialize_model(read_file(path)); }

}  // namespace lotsub
