#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "j3s/gaussian.hpp"

namespace j3s {

enum class SampleKind { ImageSet, FeatureMap };

const char* to_string(SampleKind kind) noexcept;
SampleKind parse_sample_kind(const std::string& s);

struct SampleEntry {
  std::string sample_id;
  std::filesystem::path path;  // resolved against the manifest directory
  SampleKind kind = SampleKind::ImageSet;
  std::optional<int> frame_height;
};

struct ClassRecord {
  ClassId id = 0;
  std::string name;
  std::vector<SampleEntry> samples;
};

struct Manifest {
  std::vector<ClassRecord> classes;

  std::size_t sample_count() const;
};

struct LabeledSample {
  SampleEntry entry;
  ClassId label = 0;
};

Manifest load_manifest(const std::filesystem::path& path);

/// Writes paths relative to the manifest's directory when possible.
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Parses a manifest document; relative sample paths resolve against base_dir.
Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir,
                        bool check_paths = true);

// FMX1: "FMX1", u32 LE d, u32 LE m, then d*m float64 LE column-major.
Eigen::MatrixXd parse_fmx1(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_fmx1(const Eigen::MatrixXd& m);
void write_fmx1(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// Rows are feature dimensions, comma-separated, no header.
Eigen::MatrixXd parse_csv_matrix(const std::string& text);

/// Picks the format by content: FMX1 magic, otherwise CSV.
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);

FeatureMatrix load_feature_matrix(const std::filesystem::path& path, ClassId label = 0,
                                  std::string sample_id = {});
FeatureMatrix load_sample(const LabeledSample& s);

struct SplitSpec {
  std::optional<int> gallery_per_class;  // nullopt = half, rounded up
  std::uint64_t seed = 0;
  std::optional<int> few_shot_k;
};

struct Split {
  std::vector<LabeledSample> gallery;
  std::vector<LabeledSample> probe;
};

/// Per-class shuffle with a stream derived from (seed, class id).
Split gallery_probe_split(const Manifest& manifest, const SplitSpec& spec);

/// Keeps exactly k gallery samples per class, chosen by a (seed, class) stream.
std::vector<LabeledSample> few_shot_subsample(const std::vector<LabeledSample>& gallery, int k,
                                              std::uint64_t seed);

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::optional<std::pair<double, double>> value_range;
};

/// Adds i.i.d. N(0, sigma^2) noise from a stream keyed by (seed, sample_id),
/// then clamps to value_range when set.
FeatureMatrix add_gaussian_noise(const FeatureMatrix& x, const NoiseSpec& spec);

/// Independent RNG stream for (seed, key); the same pair always yields the
/// same stream.
std::mt19937_64 keyed_stream(std::uint64_t seed, std::uint64_t key);
std::uint64_t hash_key(const std::string& s);

}  // namespace j3s
