#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "j3s/classifier.hpp"
#include "j3s/dataset.hpp"
#include "j3s/error.hpp"
#include "j3s/gaussian.hpp"
#include "j3s/harness.hpp"
#include "j3s/joint_coder.hpp"
#include "j3s/pca.hpp"
#include "j3s/spd.hpp"
#include "j3s/unitary.hpp"

namespace py = pybind11;
using namespace j3s;

namespace {

PcaMode parse_pca_mode(const std::string& s) {
  if (s == "off") return PcaMode::Off;
  if (s == "span") return PcaMode::Span;
  if (s == "centered") return PcaMode::Centered;
  throw Error(ErrorCode::InvalidConfig, "pca mode must be off, span or centered, got '" + s + "'");
}

CodingMode parse_coding(const std::string& s) {
  if (s == "per-class") return CodingMode::PerClass;
  if (s == "global") return CodingMode::Global;
  throw Error(ErrorCode::InvalidConfig, "coding must be per-class or global, got '" + s + "'");
}

FeatureMatrix feature(const Eigen::MatrixXd& data) {
  FeatureMatrix f;
  f.data = data;
  return f;
}

PatchConfig patch_config(int patch_h, int patch_w, int stride, double sparsity, int iterations) {
  PatchConfig cfg;
  cfg.patch_h = patch_h;
  cfg.patch_w = patch_w;
  cfg.stride = stride;
  cfg.sparsity_fraction = sparsity;
  cfg.iterations = iterations;
  cfg.validate();
  return cfg;
}

py::dict report_dict(const PredictionReport& r) {
  py::dict d;
  d["predicted"] = r.predicted;
  d["class_errors"] = r.class_errors;
  d["iterations"] = r.per_class_iterations;
  d["loss_traces"] = r.loss_traces;
  return d;
}

}  // namespace

PYBIND11_MODULE(_j3s, m) {
  m.doc() = "Joint statistical and spatial sparse representation";

  static py::exception<Error> error_type(m, "J3SError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      exc.attr("code") = to_string(e.code());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  // SPD utilities.
  m.def(
      "sym_eig",
      [](const Eigen::MatrixXd& a) {
        const EigPair e = sym_eig(SymMatrix(a));
        return py::make_tuple(e.values, e.vectors);
      },
      py::arg("a"), "Eigenvalues (descending) and eigenvectors of a symmetric matrix.");
  m.def(
      "spd_logm", [](const Eigen::MatrixXd& p, double floor) { return spd_logm(SymMatrix(p), floor).matrix(); },
      py::arg("p"), py::arg("eig_floor") = kDefaultEigFloor);
  m.def(
      "triu_vec", [](const Eigen::MatrixXd& s) { return triu_vec(SymMatrix(s)); }, py::arg("s"));

  // Gaussian descriptor.
  m.def(
      "robust_covariance",
      [](const Eigen::MatrixXd& c, double alpha) { return robust_covariance(SymMatrix(c), alpha).matrix(); },
      py::arg("c"), py::arg("cov_shrinkage"));
  m.def(
      "build_descriptor",
      [](const Eigen::MatrixXd& x, double cov_shrinkage, double beta, bool hellinger) {
        GaussianConfig cfg;
        cfg.cov_shrinkage = cov_shrinkage;
        cfg.beta = beta;
        cfg.use_hellinger = hellinger;
        const GaussianDescriptor g = build_descriptor(feature(x), cfg);
        py::dict d;
        d["mean"] = g.mean;
        d["robust_cov"] = g.robust_cov.matrix();
        d["embedding"] = g.embedding.matrix();
        d["stat_vector"] = g.stat_vector;
        return d;
      },
      py::arg("x"), py::arg("cov_shrinkage") = 0.5, py::arg("beta") = 1.0, py::arg("hellinger") = true);

  // Unitary dictionary.
  m.def(
      "learn_unitary",
      [](const Eigen::MatrixXd& sample, int patch_h, int patch_w, int stride, double sparsity, int iterations) {
        const UnitaryDictionary u =
            learn_unitary(sample, patch_config(patch_h, patch_w, stride, sparsity, iterations));
        py::dict d;
        d["D"] = u.D;
        d["spatial_vector"] = u.spatial_vector;
        d["objective_trace"] = u.objective_trace;
        d["final_objective"] = u.final_objective;
        d["max_unitarity_residual"] = u.max_unitarity_residual;
        return d;
      },
      py::arg("sample"), py::arg("patch_h") = 8, py::arg("patch_w") = 8, py::arg("stride") = 4,
      py::arg("sparsity") = 0.1, py::arg("iterations") = 20);

  // PCA.
  py::class_<PcaTransform>(m, "PcaTransform")
      .def_readonly("mean", &PcaTransform::mean)
      .def_readonly("components", &PcaTransform::components)
      .def_readonly("explained_variance", &PcaTransform::explained_variance);
  m.def(
      "pca_fit",
      [](const Eigen::MatrixXd& rows, std::optional<Eigen::Index> k) {
        return pca_fit(rows, k.value_or(default_pca_components(rows.rows(), rows.cols())));
      },
      py::arg("rows"), py::arg("k") = py::none(), "Fit on row samples (N x d).");
  m.def("pca_apply", &pca_apply, py::arg("transform"), py::arg("rows"));

  // Joint coding.
  py::class_<J3SParams>(m, "J3SParams")
      .def(py::init<>())
      .def_readwrite("theta", &J3SParams::theta)
      .def_readwrite("lambda1", &J3SParams::lambda1)
      .def_readwrite("lambda2", &J3SParams::lambda2)
      .def_readwrite("lambda3", &J3SParams::lambda3)
      .def_readwrite("max_iters", &J3SParams::max_iters)
      .def_readwrite("tol", &J3SParams::tol)
      .def_readwrite("eps", &J3SParams::eps);

  py::class_<JointCode>(m, "JointCode")
      .def_readonly("alpha", &JointCode::alpha)
      .def_readonly("gamma", &JointCode::gamma)
      .def_readonly("g_diag", &JointCode::g_diag)
      .def_readonly("loss_trace", &JointCode::loss_trace)
      .def_readonly("iterations_used", &JointCode::iterations_used)
      .def_readonly("converged", &JointCode::converged);

  py::class_<JointDictionary>(m, "JointDictionary")
      .def_readonly("U", &JointDictionary::U)
      .def_readonly("V", &JointDictionary::V)
      .def_readonly("column_labels", &JointDictionary::column_labels)
      .def_property_readonly("classes", &JointDictionary::classes)
      .def_property_readonly("class_ranges", [](const JointDictionary& d) {
        py::dict out;
        for (const auto& [c, r] : d.class_ranges) out[py::int_(c)] = py::make_tuple(r.begin, r.end);
        return out;
      });

  m.def(
      "assemble_dictionaries",
      [](const Eigen::MatrixXd& stat, const Eigen::MatrixXd& spat, const std::vector<ClassId>& labels,
         const std::string& pca) {
        if (stat.cols() != spat.cols() || stat.cols() != static_cast<Eigen::Index>(labels.size())) {
          throw Error(ErrorCode::DimensionMismatch, "stat, spat and labels must agree on the atom count");
        }
        std::vector<Atom> atoms;
        for (Eigen::Index k = 0; k < stat.cols(); ++k) {
          atoms.push_back(Atom{stat.col(k), spat.col(k), labels[static_cast<std::size_t>(k)],
                               std::to_string(k)});
        }
        AssembleOptions opts;
        opts.pca = parse_pca_mode(pca);
        return assemble_dictionaries(atoms, opts);
      },
      py::arg("stat"), py::arg("spat"), py::arg("labels"), py::arg("pca") = "off",
      "Columns of stat / spat are atoms; labels gives each atom's class.");
  m.def(
      "project_query",
      [](const JointDictionary& d, const Eigen::VectorXd& stat, const Eigen::VectorXd& spat) {
        const Query q = project_query(d, stat, spat);
        return py::make_tuple(q.stat, q.spat);
      },
      py::arg("dictionary"), py::arg("stat"), py::arg("spat"));
  m.def(
      "solve",
      [](const JointDictionary& d, const Eigen::VectorXd& stat, const Eigen::VectorXd& spat,
         const J3SParams& params, std::optional<ClassId> restrict_to) {
        return solve(project_query(d, stat, spat), d, params, restrict_to);
      },
      py::arg("dictionary"), py::arg("stat"), py::arg("spat"), py::arg("params") = J3SParams{},
      py::arg("restrict_to") = py::none(), "Raw query vectors are projected before solving.");
  m.def("solve_columns", &solve_columns, py::arg("q_stat"), py::arg("q_spat"), py::arg("U"), py::arg("V"),
        py::arg("params") = J3SParams{});
  m.def(
      "predict",
      [](const JointDictionary& d, const Eigen::VectorXd& stat, const Eigen::VectorXd& spat,
         const J3SParams& params, const std::string& coding, bool keep_traces) {
        PredictOptions o;
        o.mode = parse_coding(coding);
        o.keep_traces = keep_traces;
        return report_dict(predict(project_query(d, stat, spat), d, params, o));
      },
      py::arg("dictionary"), py::arg("stat"), py::arg("spat"), py::arg("params") = J3SParams{},
      py::arg("coding") = "per-class", py::arg("keep_traces") = false);

  // Files.
  m.def(
      "encode_fmx1",
      [](const Eigen::MatrixXd& a) {
        const auto bytes = encode_fmx1(a);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      },
      py::arg("matrix"));
  m.def(
      "decode_fmx1",
      [](const py::bytes& b) {
        const std::string s = b;
        return parse_fmx1(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
      },
      py::arg("data"));
  m.def("write_fmx1", &write_fmx1, py::arg("path"), py::arg("matrix"));
  m.def("read_matrix", &load_matrix, py::arg("path"), "Reads an FMX1 or CSV matrix file.");

  // Harness.
  m.def(
      "generate_synthetic",
      [](const std::filesystem::path& out, int classes, int dim, int set_size, int samples_per_class,
         double separation, std::uint64_t seed, bool intensity) {
        SynthSpec s;
        s.classes = classes;
        s.dim = dim;
        s.set_size = set_size;
        s.samples_per_class = samples_per_class;
        s.separation = separation;
        s.seed = seed;
        s.intensity = intensity;
        generate_synthetic(s, out);
        return out / "manifest.json";
      },
      py::arg("out_dir"), py::arg("classes") = 4, py::arg("dim") = 10, py::arg("set_size") = 50,
      py::arg("samples_per_class") = 10, py::arg("separation") = 5.0, py::arg("seed") = 1,
      py::arg("intensity") = false, "Writes FMX1 samples plus manifest.json; returns the manifest path.");
  m.def(
      "run_benchmark",
      [](const std::filesystem::path& manifest, const J3SParams& params, int repeats, std::uint64_t seed,
         bool hellinger, int patch, int stride, double sparsity, const std::string& pca, double noise_sigma,
         std::optional<int> few_shot_k, std::optional<std::filesystem::path> out_dir, unsigned threads) {
        ExperimentConfig cfg;
        cfg.manifest = manifest;
        cfg.params = params;
        cfg.repeats = repeats;
        cfg.split.seed = seed;
        cfg.split.few_shot_k = few_shot_k;
        cfg.gaussian.use_hellinger = hellinger;
        cfg.patch.patch_h = cfg.patch.patch_w = patch;
        cfg.patch.stride = stride;
        cfg.patch.sparsity_fraction = sparsity;
        cfg.pca = parse_pca_mode(pca);
        if (noise_sigma > 0) cfg.noise = NoiseSpec{noise_sigma, seed, std::nullopt};
        cfg.threads = threads;
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run_benchmark(cfg);
        }
        if (out_dir) write_report_files(*out_dir, r);
        py::dict d;
        d["accuracy"] = r.accuracy;
        d["mean_accuracy"] = r.mean_accuracy;
        d["std_accuracy"] = r.std_accuracy;
        d["classes"] = r.classes;
        py::list rows;
        for (const auto& row : r.rows) {
          py::dict item = report_dict(row.report);
          item["repeat"] = row.repeat;
          item["sample_id"] = row.report.sample_id;
          item["true_label"] = row.report.true_label;
          rows.append(item);
        }
        d["rows"] = rows;
        return d;
      },
      py::arg("manifest"), py::arg("params") = J3SParams{}, py::arg("repeats") = 1, py::arg("seed") = 0,
      py::arg("hellinger") = true, py::arg("patch") = 8, py::arg("stride") = 4, py::arg("sparsity") = 0.1,
      py::arg("pca") = "off", py::arg("noise_sigma") = 0.0, py::arg("few_shot_k") = py::none(),
      py::arg("out_dir") = py::none(), py::arg("threads") = 0);
}
