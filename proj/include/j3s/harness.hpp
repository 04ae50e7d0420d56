#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "j3s/classifier.hpp"
#include "j3s/dataset.hpp"
#include "j3s/gaussian.hpp"
#include "j3s/joint_coder.hpp"
#include "j3s/unitary.hpp"

namespace j3s {

struct ExperimentConfig {
  std::filesystem::path manifest;
  J3SParams params;
  GaussianConfig gaussian;
  PatchConfig patch;
  /// Forces a patch layout; by default image sets with a frame height are
  /// tiled into a mosaic and everything else uses the raw matrix.
  std::optional<PatchLayout> layout_override;
  SplitSpec split;
  std::optional<NoiseSpec> noise;
  PcaMode pca = PcaMode::Off;
  bool pca_fit_all = false;  // include probe columns in the PCA fit
  CodingMode coding = CodingMode::PerClass;
  int repeats = 1;
  bool trace_losses = false;  // first probe of each class
  unsigned threads = 0;       // 0 = hardware concurrency

  void validate() const;
};

struct PredictionRow {
  int repeat = 0;
  PredictionReport report;
};

struct TraceRow {
  int repeat = 0;
  std::string sample_id;
  ClassId solve_class = 0;
  std::vector<double> losses;
};

struct RunReport {
  std::vector<ClassId> classes;
  std::vector<double> accuracy;  // one per repeat
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation, 0 for one repeat
  std::vector<PredictionRow> rows;
  std::vector<TraceRow> traces;
  std::map<std::string, double> timings_ms;
};

/// Per-sample dictionary inputs.
struct SampleCode {
  GaussianDescriptor gaussian;
  UnitaryDictionary unitary;
};

SampleCode encode_sample(const FeatureMatrix& x, const SampleEntry& entry,
                         const ExperimentConfig& cfg);

RunReport run_benchmark(const ExperimentConfig& cfg);

/// Parameters run_ablation accepts.
const std::vector<std::string>& ablation_parameters();

/// Returns a copy of cfg with the named parameter set from its text value.
ExperimentConfig with_parameter(const ExperimentConfig& cfg, const std::string& name,
                                const std::string& value);

struct AblationResult {
  std::string parameter;
  std::vector<std::string> values;
  std::vector<RunReport> reports;
};

AblationResult run_ablation(const ExperimentConfig& cfg, const std::string& parameter,
                            const std::vector<std::string>& values);

struct SynthSpec {
  int classes = 4;
  int dim = 10;
  int set_size = 50;
  int samples_per_class = 10;
  double separation = 5.0;  // distance of each class mean from the origin, in units of sigma
  std::uint64_t seed = 1;
  bool intensity = false;  // 0..255 pixel scale (base 128, sigma 10) instead of unit scale
};

/// Writes one FMX1 file per sample plus manifest.json into out_dir and
/// returns the manifest.
Manifest generate_synthetic(const SynthSpec& spec, const std::filesystem::path& out_dir);

/// Same data without touching disk (sample paths are left empty).
std::vector<FeatureMatrix> synthesize_samples(const SynthSpec& spec);

void write_predictions_csv(std::ostream& out, const RunReport& report);
void write_summary_csv(std::ostream& out, const RunReport& report);
void write_traces_csv(std::ostream& out, const RunReport& report);
void write_ablation_csv(std::ostream& out, const AblationResult& result);

/// predictions.csv, summary.csv and (when traces exist) traces.csv.
void write_report_files(const std::filesystem::path& dir, const RunReport& report);

std::string format_double(double v);

}  // namespace j3s
