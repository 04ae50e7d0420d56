#include "j3s/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "j3s/error.hpp"
#include "j3s/parallel.hpp"

namespace j3s {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

unsigned worker_count(const ExperimentConfig& cfg) {
  return cfg.threads == 0 ? default_threads() : cfg.threads;
}

[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context) {
  throw Error(e.code(), context + ": " + e.what());
}

double parse_double(const std::string& name, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "value '" + value + "' for " + name + " is not a number");
  }
}

bool parse_bool(const std::string& name, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw Error(ErrorCode::InvalidConfig, "value '" + value + "' for " + name + " is not a boolean");
}

}  // namespace

void ExperimentConfig::validate() const {
  params.validate();
  gaussian.validate();
  patch.validate();
  if (repeats < 1) throw Error(ErrorCode::InvalidConfig, "repeats must be >= 1");
  if (split.gallery_per_class && *split.gallery_per_class < 1) {
    throw Error(ErrorCode::InvalidConfig, "gallery_per_class must be >= 1");
  }
  if (split.few_shot_k && *split.few_shot_k < 1) {
    throw Error(ErrorCode::InvalidConfig, "few_shot_k must be >= 1");
  }
  if (noise && !(noise->sigma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise sigma must be >= 0");
}

SampleCode encode_sample(const FeatureMatrix& x, const SampleEntry& entry,
                         const ExperimentConfig& cfg) {
  PatchConfig patch = cfg.patch;
  if (entry.frame_height) patch.frame_height = *entry.frame_height;
  if (cfg.layout_override) {
    patch.layout = *cfg.layout_override;
  } else {
    patch.layout = entry.kind == SampleKind::ImageSet && patch.frame_height > 0 ? PatchLayout::Mosaic
                                                                                : PatchLayout::Matrix;
  }
  SampleCode code;
  code.gaussian = build_descriptor(x, cfg.gaussian);
  code.unitary = learn_unitary(x.data, patch);
  return code;
}

RunReport run_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  RunReport report;
  const unsigned threads = worker_count(cfg);

  auto t0 = Clock::now();
  const Manifest manifest = load_manifest(cfg.manifest);
  std::vector<LabeledSample> samples;
  for (const auto& c : manifest.classes) {
    report.classes.push_back(c.id);
    for (const auto& s : c.samples) samples.push_back(LabeledSample{s, c.id});
  }
  std::sort(report.classes.begin(), report.classes.end());

  std::vector<FeatureMatrix> matrices(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    try {
      FeatureMatrix x = load_sample(samples[i]);
      if (cfg.noise) {
        NoiseSpec noise = *cfg.noise;
        if (!noise.value_range && samples[i].entry.kind == SampleKind::ImageSet) {
          noise.value_range = std::make_pair(0.0, 255.0);  // pixel data
        }
        x = add_gaussian_noise(x, noise);
      }
      matrices[i] = std::move(x);
    } catch (const Error& e) {
      rethrow_with_context(e, "sample '" + samples[i].entry.sample_id + "'");
    }
  });
  report.timings_ms["load"] = elapsed_ms(t0);

  // Descriptors depend only on the sample, so they are shared by all repeats.
  t0 = Clock::now();
  std::vector<SampleCode> codes(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    try {
      codes[i] = encode_sample(matrices[i], samples[i].entry, cfg);
    } catch (const Error& e) {
      rethrow_with_context(e, "sample '" + samples[i].entry.sample_id + "'");
    }
  });
  report.timings_ms["encode"] = elapsed_ms(t0);

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < samples.size(); ++i) index[samples[i].entry.sample_id] = i;

  double dict_ms = 0.0;
  double classify_ms = 0.0;
  for (int r = 0; r < cfg.repeats; ++r) {
    try {
      SplitSpec split_spec = cfg.split;
      split_spec.seed = cfg.split.seed + static_cast<std::uint64_t>(r);
      const Split split = gallery_probe_split(manifest, split_spec);

      auto td = Clock::now();
      std::vector<Atom> atoms;
      for (const auto& g : split.gallery) {
        const SampleCode& c = codes[index.at(g.entry.sample_id)];
        atoms.push_back(make_atom(c.gaussian, c.unitary, g.label, g.entry.sample_id));
      }
      AssembleOptions opts;
      opts.pca = cfg.pca;
      opts.declared_classes = report.classes;
      if (cfg.pca != PcaMode::Off && cfg.pca_fit_all && !split.probe.empty()) {
        const auto n = static_cast<Eigen::Index>(split.probe.size());
        opts.extra_stat_fit.resize(atoms.front().stat.size(), n);
        opts.extra_spat_fit.resize(atoms.front().spat.size(), n);
        for (Eigen::Index j = 0; j < n; ++j) {
          const SampleCode& c = codes[index.at(split.probe[static_cast<std::size_t>(j)].entry.sample_id)];
          opts.extra_stat_fit.col(j) = c.gaussian.stat_vector;
          opts.extra_spat_fit.col(j) = c.unitary.spatial_vector;
        }
      }
      const JointDictionary dict = assemble_dictionaries(atoms, opts);
      dict_ms += elapsed_ms(td);

      std::vector<bool> traced(split.probe.size(), false);
      if (cfg.trace_losses) {
        std::map<ClassId, bool> seen;
        for (std::size_t i = 0; i < split.probe.size(); ++i) {
          if (!seen[split.probe[i].label]) traced[i] = seen[split.probe[i].label] = true;
        }
      }

      auto tc = Clock::now();
      std::vector<PredictionReport> preds(split.probe.size());
      parallel_for(split.probe.size(), threads, [&](std::size_t i) {
        const LabeledSample& p = split.probe[i];
        try {
          const SampleCode& c = codes[index.at(p.entry.sample_id)];
          const Query q = project_query(dict, c.gaussian.stat_vector, c.unitary.spatial_vector);
          PredictionReport pr = predict(q, dict, cfg.params, PredictOptions{cfg.coding, traced[i]});
          pr.sample_id = p.entry.sample_id;
          pr.true_label = p.label;
          preds[i] = std::move(pr);
        } catch (const Error& e) {
          rethrow_with_context(e, "probe '" + p.entry.sample_id + "'");
        }
      });
      classify_ms += elapsed_ms(tc);

      std::size_t correct = 0;
      for (auto& pr : preds) {
        if (pr.predicted == *pr.true_label) ++correct;
        for (auto& [cls, trace] : pr.loss_traces) {
          report.traces.push_back(TraceRow{r, pr.sample_id, cls, trace});
        }
        pr.loss_traces.clear();
        report.rows.push_back(PredictionRow{r, std::move(pr)});
      }
      report.accuracy.push_back(preds.empty() ? 0.0
                                              : static_cast<double>(correct) /
                                                    static_cast<double>(preds.size()));
    } catch (const Error& e) {
      rethrow_with_context(e, "repeat " + std::to_string(r));
    }
  }
  report.timings_ms["dictionary"] = dict_ms;
  report.timings_ms["classify"] = classify_ms;

  const double n = static_cast<double>(report.accuracy.size());
  report.mean_accuracy = std::accumulate(report.accuracy.begin(), report.accuracy.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : report.accuracy) ss += (a - report.mean_accuracy) * (a - report.mean_accuracy);
  report.std_accuracy = report.accuracy.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return report;
}

const std::vector<std::string>& ablation_parameters() {
  static const std::vector<std::string> names{"theta",   "lambda1",           "lambda2",
                                              "lambda3", "sparsity_fraction", "use_pca",
                                              "noise_sigma", "few_shot_k"};
  return names;
}

ExperimentConfig with_parameter(const ExperimentConfig& cfg, const std::string& name,
                                const std::string& value) {
  ExperimentConfig out = cfg;
  if (name == "theta") {
    out.params.theta = parse_double(name, value);
  } else if (name == "lambda1") {
    out.params.lambda1 = parse_double(name, value);
  } else if (name == "lambda2") {
    out.params.lambda2 = parse_double(name, value);
  } else if (name == "lambda3") {
    out.params.lambda3 = parse_double(name, value);
  } else if (name == "sparsity_fraction") {
    out.patch.sparsity_fraction = parse_double(name, value);
  } else if (name == "use_pca") {
    out.pca = parse_bool(name, value) ? PcaMode::Span : PcaMode::Off;
  } else if (name == "noise_sigma") {
    NoiseSpec noise = cfg.noise.value_or(NoiseSpec{0.0, cfg.split.seed, std::nullopt});
    noise.sigma = parse_double(name, value);
    out.noise = noise;
  } else if (name == "few_shot_k") {
    out.split.few_shot_k = static_cast<int>(parse_double(name, value));
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown ablation parameter '" + name + "'");
  }
  out.validate();
  return out;
}

AblationResult run_ablation(const ExperimentConfig& cfg, const std::string& parameter,
                            const std::vector<std::string>& values) {
  if (values.empty()) throw Error(ErrorCode::InvalidConfig, "ablation needs at least one value");
  AblationResult result;
  result.parameter = parameter;
  result.values = values;
  // Validate every value before running anything.
  std::vector<ExperimentConfig> configs;
  for (const auto& v : values) configs.push_back(with_parameter(cfg, parameter, v));
  for (const auto& c : configs) result.reports.push_back(run_benchmark(c));
  return result;
}

std::vector<FeatureMatrix> synthesize_samples(const SynthSpec& spec) {
  if (spec.classes < 1 || spec.dim < 1 || spec.set_size < 2 || spec.samples_per_class < 1) {
    throw Error(ErrorCode::InvalidConfig, "synthetic spec needs classes, dim >= 1 and set_size >= 2");
  }
  if (!(spec.separation >= 0.0)) throw Error(ErrorCode::InvalidConfig, "separation must be >= 0");
  const double base = spec.intensity ? 128.0 : 0.0;
  const double sigma = spec.intensity ? 10.0 : 1.0;
  const int d = spec.dim;
  // Covariance spread grows with separation so that separation 0 gives identical classes.
  const double spread = std::min(0.5, 0.1 * spec.separation);

  std::vector<FeatureMatrix> out;
  for (int c = 0; c < spec.classes; ++c) {
    auto rng = keyed_stream(spec.seed, static_cast<std::uint64_t>(c));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    Eigen::VectorXd dir(d);
    for (int i = 0; i < d; ++i) dir(i) = normal(rng);
    dir.normalize();
    const Eigen::VectorXd mean = Eigen::VectorXd::Constant(d, base) + spec.separation * sigma * dir;

    Eigen::MatrixXd g(d, d);
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < d; ++i) g(i, j) = normal(rng);
    }
    const Eigen::MatrixXd rotation = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Eigen::VectorXd scales(d);
    for (int i = 0; i < d; ++i) scales(i) = 1.0 + spread * unit(rng);
    const Eigen::MatrixXd root =
        spread > 0.0 ? Eigen::MatrixXd(sigma * rotation * scales.asDiagonal())
                     : Eigen::MatrixXd(sigma * Eigen::MatrixXd::Identity(d, d));

    for (int s = 0; s < spec.samples_per_class; ++s) {
      char id[64];
      std::snprintf(id, sizeof id, "c%d_s%03d", c, s);
      auto srng = keyed_stream(spec.seed, hash_key(id));
      Eigen::MatrixXd z(d, spec.set_size);
      for (int j = 0; j < spec.set_size; ++j) {
        for (int i = 0; i < d; ++i) z(i, j) = normal(srng);
      }
      Eigen::MatrixXd x = (root * z).colwise() + mean;
      if (spec.intensity) x = x.cwiseMax(0.0).cwiseMin(255.0);
      out.push_back(FeatureMatrix{std::move(x), c, id});
    }
  }
  return out;
}

Manifest generate_synthetic(const SynthSpec& spec, const fs::path& out_dir) {
  const auto samples = synthesize_samples(spec);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + out_dir.string() + "': " + ec.message());

  Manifest manifest;
  for (int c = 0; c < spec.classes; ++c) {
    manifest.classes.push_back(ClassRecord{c, "class_" + std::to_string(c), {}});
  }
  for (const auto& x : samples) {
    const fs::path file = out_dir / (x.sample_id + ".fmx");
    write_fmx1(file, x.data);
    manifest.classes[static_cast<std::size_t>(x.label)].samples.push_back(
        SampleEntry{x.sample_id, file, spec.intensity ? SampleKind::ImageSet : SampleKind::FeatureMap,
                    std::nullopt});
  }
  save_manifest(out_dir / "manifest.json", manifest);
  return manifest;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_predictions_csv(std::ostream& out, const RunReport& report) {
  out << "repeat,sample_id,true_label,predicted";
  for (std::size_t i = 0; i < report.classes.size(); ++i) out << ",e_class_" << i;
  out << ",iterations\n";
  for (const auto& row : report.rows) {
    const auto& pr = row.report;
    out << row.repeat << ',' << pr.sample_id << ','
        << (pr.true_label ? std::to_string(*pr.true_label) : std::string()) << ',' << pr.predicted;
    int iterations = 0;
    for (ClassId c : report.classes) {
      const auto it = pr.class_errors.find(c);
      out << ',' << (it == pr.class_errors.end() ? std::string() : format_double(it->second));
      const auto jt = pr.per_class_iterations.find(c);
      if (jt != pr.per_class_iterations.end()) iterations += jt->second;
    }
    out << ',' << iterations << '\n';
  }
}

void write_summary_csv(std::ostream& out, const RunReport& report) {
  out << "repeat,accuracy\n";
  for (std::size_t r = 0; r < report.accuracy.size(); ++r) {
    out << r << ',' << format_double(report.accuracy[r]) << '\n';
  }
  out << "mean," << format_double(report.mean_accuracy) << '\n';
  out << "std," << format_double(report.std_accuracy) << '\n';
}

void write_traces_csv(std::ostream& out, const RunReport& report) {
  out << "repeat,sample_id,class,iteration,loss\n";
  for (const auto& t : report.traces) {
    for (std::size_t i = 0; i < t.losses.size(); ++i) {
      out << t.repeat << ',' << t.sample_id << ',' << t.solve_class << ',' << (i + 1) << ','
          << format_double(t.losses[i]) << '\n';
    }
  }
}

void write_ablation_csv(std::ostream& out, const AblationResult& result) {
  out << "parameter,value,repeat,accuracy\n";
  for (std::size_t v = 0; v < result.values.size(); ++v) {
    const auto& rep = result.reports[v];
    for (std::size_t r = 0; r < rep.accuracy.size(); ++r) {
      out << result.parameter << ',' << result.values[v] << ',' << r << ','
          << format_double(rep.accuracy[r]) << '\n';
    }
  }
}

void write_report_files(const fs::path& dir, const RunReport& report) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
  auto open = [](const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw Error(ErrorCode::IoError, "cannot write '" + p.string() + "'");
    return f;
  };
  {
    auto f = open(dir / "predictions.csv");
    write_predictions_csv(f, report);
  }
  {
    auto f = open(dir / "summary.csv");
    write_summary_csv(f, report);
  }
  if (!report.traces.empty()) {
    auto f = open(dir / "traces.csv");
    write_traces_csv(f, report);
  }
}

}  // namespace j3s
