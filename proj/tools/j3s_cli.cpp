// j3s: benchmark, ablate and synth subcommands over a dataset manifest.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "j3s/error.hpp"
#include "j3s/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct CliState {
  j3s::ExperimentConfig cfg;
  std::string manifest;
  std::string patch = "8x8";
  std::string gallery = "half";
  std::string coding = "per-class";
  std::string layout;
  bool pca = false;
  bool no_pca = false;
  bool hellinger = false;
  bool no_hellinger = false;
  double noise_sigma = -1.0;
  std::vector<double> noise_clamp;
  std::uint64_t noise_seed = 0;
  int few_shot_k = 0;
  std::string out = "j3s_out";
};

void add_experiment_options(CLI::App* app, CliState& s) {
  app->add_option("--manifest", s.manifest, "Dataset manifest (JSON)")->required();
  app->add_option("--theta", s.cfg.params.theta, "Statistical/spatial weight in (0,1)");
  app->add_option("--lambda1", s.cfg.params.lambda1, "Ridge weight on alpha");
  app->add_option("--lambda2", s.cfg.params.lambda2, "Ridge weight on gamma");
  app->add_option("--lambda3", s.cfg.params.lambda3, "Joint l2,1 weight");
  app->add_option("--max-iters", s.cfg.params.max_iters, "Solver iteration cap");
  app->add_option("--tol", s.cfg.params.tol, "Stop when successive losses differ by less");
  app->add_option("--cov-alpha", s.cfg.gaussian.cov_shrinkage, "Robust covariance shrinkage in (0,1)");
  app->add_option("--beta", s.cfg.gaussian.beta, "Mean weight in the SPD embedding");
  app->add_flag("--hellinger", s.hellinger, "Apply the Hellinger (sqrt) feature map");
  app->add_flag("--no-hellinger", s.no_hellinger, "Use features as-is (signed data)");
  app->add_option("--patch", s.patch, "Patch size HxW or N");
  app->add_option("--stride", s.cfg.patch.stride, "Patch stride");
  app->add_option("--sparsity", s.cfg.patch.sparsity_fraction, "Fraction of nonzeros per patch code");
  app->add_option("--dict-iters", s.cfg.patch.iterations, "Transform learning iterations");
  app->add_option("--layout", s.layout, "Patch layout: matrix, mosaic or per-frame");
  app->add_option("--frame-height", s.cfg.patch.frame_height, "Frame height for mosaic/per-frame");
  app->add_flag("--pca", s.pca, "Reduce dictionaries with PCA");
  app->add_flag("--no-pca", s.no_pca, "Keep full-dimensional dictionaries");
  app->add_flag("--pca-fit-all", s.cfg.pca_fit_all, "Fit PCA on gallery and probe samples");
  app->add_option("--coding", s.coding, "per-class or global sparse coding");
  app->add_option("--noise-sigma", s.noise_sigma, "Gaussian noise std added to every sample");
  app->add_option("--noise-clamp", s.noise_clamp, "Clamp range after noise: LOW HIGH")->expected(2);
  app->add_option("--noise-seed", s.noise_seed, "Noise stream seed");
  app->add_option("--few-shot-k", s.few_shot_k, "Keep K gallery samples per class");
  app->add_option("--gallery-per-class", s.gallery, "Gallery size per class, or 'half'");
  app->add_option("--repeats", s.cfg.repeats, "Number of random splits");
  app->add_option("--seed", s.cfg.split.seed, "Split seed (repeat r uses seed + r)");
  app->add_flag("--trace-losses", s.cfg.trace_losses, "Record loss traces for the first probe of each class");
  app->add_option("--threads", s.cfg.threads, "Worker threads (0 = all cores)");
  app->add_option("--out", s.out, "Output directory");
}

j3s::ExperimentConfig finish_config(CliState& s) {
  using j3s::Error;
  using j3s::ErrorCode;
  j3s::ExperimentConfig cfg = s.cfg;
  cfg.manifest = s.manifest;

  int h = 0, w = 0;
  char x = 0;
  std::istringstream ps(s.patch);
  if ((ps >> h) && !(ps >> x)) {
    w = h;
  } else {
    std::istringstream ps2(s.patch);
    if (!(ps2 >> h >> x >> w) || (x != 'x' && x != 'X')) {
      throw Error(ErrorCode::InvalidConfig, "--patch expects HxW or N, got '" + s.patch + "'");
    }
  }
  cfg.patch.patch_h = h;
  cfg.patch.patch_w = w;

  if (s.layout == "matrix") cfg.layout_override = j3s::PatchLayout::Matrix;
  else if (s.layout == "mosaic") cfg.layout_override = j3s::PatchLayout::Mosaic;
  else if (s.layout == "per-frame") cfg.layout_override = j3s::PatchLayout::PerFrame;
  else if (!s.layout.empty()) throw Error(ErrorCode::InvalidConfig, "unknown --layout '" + s.layout + "'");

  if (s.pca && s.no_pca) throw Error(ErrorCode::InvalidConfig, "--pca and --no-pca are exclusive");
  cfg.pca = s.pca ? j3s::PcaMode::Span : j3s::PcaMode::Off;
  if (s.hellinger && s.no_hellinger) {
    throw Error(ErrorCode::InvalidConfig, "--hellinger and --no-hellinger are exclusive");
  }
  if (s.no_hellinger) cfg.gaussian.use_hellinger = false;

  if (s.coding == "per-class") cfg.coding = j3s::CodingMode::PerClass;
  else if (s.coding == "global") cfg.coding = j3s::CodingMode::Global;
  else throw Error(ErrorCode::InvalidConfig, "unknown --coding '" + s.coding + "'");

  if (s.gallery == "half") {
    cfg.split.gallery_per_class.reset();
  } else {
    try {
      cfg.split.gallery_per_class = std::stoi(s.gallery);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "--gallery-per-class expects an integer or 'half'");
    }
  }
  if (s.few_shot_k > 0) cfg.split.few_shot_k = s.few_shot_k;
  if (s.noise_sigma >= 0.0) {
    j3s::NoiseSpec noise{s.noise_sigma, s.noise_seed, std::nullopt};
    if (s.noise_clamp.size() == 2) noise.value_range = std::make_pair(s.noise_clamp[0], s.noise_clamp[1]);
    cfg.noise = noise;
  }
  cfg.validate();
  return cfg;
}

void print_summary(const std::string& label, const j3s::RunReport& report) {
  std::fprintf(stderr, "%saccuracy mean=%.4f std=%.4f over %zu repeat(s)\n", label.c_str(),
               report.mean_accuracy, report.std_accuracy, report.accuracy.size());
  for (const auto& [phase, ms] : report.timings_ms) {
    std::fprintf(stderr, "  %-10s %10.1f ms\n", phase.c_str(), ms);
  }
}

int exit_code_for(const j3s::Error& e) {
  switch (e.category()) {
    case j3s::ErrorCategory::Config: return kExitConfig;
    case j3s::ErrorCategory::Numerical: return kExitNumerical;
    case j3s::ErrorCategory::Data: return kExitData;
  }
  return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint statistical and spatial sparse representation classifier"};
  app.require_subcommand(1);

  CliState bench;
  auto* benchmark = app.add_subcommand("benchmark", "Run repeated gallery/probe classification");
  add_experiment_options(benchmark, bench);

  CliState abl;
  std::string param;
  std::vector<std::string> values;
  auto* ablate = app.add_subcommand("ablate", "Run one benchmark per value of a parameter");
  add_experiment_options(ablate, abl);
  ablate->add_option("--param", param, "theta, lambda1, lambda2, lambda3, sparsity_fraction, use_pca, noise_sigma, few_shot_k")
      ->required();
  ablate->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');

  j3s::SynthSpec synth_spec;
  std::string synth_out = "synthetic";
  auto* synth = app.add_subcommand("synth", "Write a synthetic Gaussian image-set dataset");
  synth->add_option("--classes", synth_spec.classes, "Number of classes");
  synth->add_option("--dim", synth_spec.dim, "Feature dimension d");
  synth->add_option("--set-size", synth_spec.set_size, "Columns per sample m");
  synth->add_option("--samples-per-class", synth_spec.samples_per_class, "Samples per class");
  synth->add_option("--separation", synth_spec.separation, "Class mean offset in units of sigma");
  synth->add_option("--seed", synth_spec.seed, "Generator seed");
  synth->add_flag("--intensity", synth_spec.intensity, "Pixel-scale data in [0,255]");
  synth->add_option("--out", synth_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*benchmark) {
      const auto cfg = finish_config(bench);
      const auto report = j3s::run_benchmark(cfg);
      j3s::write_report_files(bench.out, report);
      print_summary("", report);
    } else if (*ablate) {
      const auto cfg = finish_config(abl);
      const auto result = j3s::run_ablation(cfg, param, values);
      std::filesystem::create_directories(abl.out);
      std::ofstream f(std::filesystem::path(abl.out) / "ablation.csv");
      if (!f) throw j3s::Error(j3s::ErrorCode::IoError, "cannot write ablation.csv");
      j3s::write_ablation_csv(f, result);
      for (std::size_t i = 0; i < values.size(); ++i) {
        j3s::write_report_files(std::filesystem::path(abl.out) / (param + "_" + values[i]),
                                result.reports[i]);
        print_summary(param + "=" + values[i] + ": ", result.reports[i]);
      }
    } else if (*synth) {
      const auto manifest = j3s::generate_synthetic(synth_spec, synth_out);
      std::fprintf(stderr, "wrote %zu samples to %s\n", manifest.sample_count(), synth_out.c_str());
    }
  } catch (const j3s::Error& e) {
    std::fprintf(stderr, "error: code=%s message=\"%s\"\n", j3s::to_string(e.code()), e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: code=Internal message=\"%s\"\n", e.what());
    return kExitData;
  }
  return 0;
}
