#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lotsub/pointset.hpp"
#include "lotsub/subspace.hpp"

namespace lotsub {

/// Decimal form with 17 significant digits; parses back to the same double.
std::string format_real(double x);
/// Strict decimal parse of a whole token (surrounding blanks allowed).
std::optional<double> parse_real(std::string_view token);

/// Rows of L comma-separated reals; an optional first line starting with '#' is a header.
PointSet read_pointset_csv(const std::filesystem::path& path);
void write_pointset_csv(const PointSet& p, const std::filesystem::path& path);

struct ManifestEntry {
  int class_label = 0;
  std::filesystem::path path;  // as written in the manifest
};

/// Lines "label,relative-path"; blank lines and '#' comments skipped.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& manifest_path);

/// Loads every manifest entry (paths resolved against the manifest's
/// directory). With target_n set, larger sets are subsampled without
/// replacement and smaller ones are topped up with jittered copies of
/// existing points; each sample uses its own seeded substream.
LabeledDataset load_dataset(const std::filesystem::path& manifest_path, std::optional<std::size_t> target_n,
                            std::uint64_t seed);

/// Brings p to exactly target_n points (identity when already there).
PointSet resample_to(const PointSet& p, std::size_t target_n, std::uint64_t seed);

/// Writes one CSV per sample under dir/<split>/class_<k>/ and the manifest
/// dir/<split>_manifest.csv. Returns the manifest path.
std::filesystem::path write_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir,
                                    const std::string& split);

inline constexpr int kModelFormatVersion = 1;

void save_model(const LotNsModel& model, const std::filesystem::path& path);
/// Throws VersionMismatch, ChecksumMismatch, ParseError or IoError.
LotNsModel load_model(const std::filesystem::path& path);

/// Text serialization used by save_model, including the trailing checksum line.
std::string serialize_model(const LotNsModel& model);
LotNsModel deserialize_model(const std::string& text);

/// Writes via a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace lotsub
