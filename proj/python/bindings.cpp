#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ensdet/aggregation.hpp"
#include "ensdet/cli.hpp"
#include "ensdet/evaluation.hpp"
#include "ensdet/oracle.hpp"
#include "ensdet/report.hpp"
#include "ensdet/threshold_search.hpp"

namespace py = pybind11;
using namespace ensdet;

namespace {

ScoreTensor make_tensor(ScoreKind kind, const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw_invalid("score tensor needs at least one row");
  const std::size_t width = rows.front().size();
  std::vector<std::string> ids;
  std::vector<double> values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) throw_invalid("score rows must share one width");
    ids.push_back("m" + std::to_string(i));
    values.insert(values.end(), rows[i].begin(), rows[i].end());
  }
  return ScoreTensor("sample", kind, std::move(ids), width, std::move(values));
}

py::dict decision_dict(const Decision& d) {
  py::dict out;
  out["y_hat"] = d.y_hat.value;
  out["z_hat"] = as_int(d.z_hat);
  out["fake_score"] = d.fake_score;
  out["class_scores"] = d.class_scores;
  return out;
}

ConfusionMatrix make_confusion(const std::vector<std::vector<std::uint64_t>>& counts) {
  ConfusionMatrix cm(counts.size());
  for (std::size_t t = 0; t < counts.size(); ++t) {
    if (counts[t].size() != counts.size()) throw_invalid("confusion matrix must be square");
    for (std::size_t p = 0; p < counts.size(); ++p) cm.add(t, p, counts[t][p]);
  }
  return cm;
}

MetricMode mode_of(bool lenient) { return lenient ? MetricMode::lenient : MetricMode::strict; }

struct Loaded {
  DatasetManifest manifest;
  ScoreSet scores;
};

Loaded load(const std::string& manifest, const std::string& scores) {
  Loaded l;
  l.manifest = read_manifest(std::filesystem::path(manifest));
  l.scores = read_scores(std::filesystem::path(scores), &l.manifest);
  return l;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Score-level ensembles and balanced-accuracy evaluation for face-forgery detectors";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&] { return py::object(py::exception<Error>(m, "EnsdetError", PyExc_ValueError)); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const char* kind = e.kind() == ErrorKind::io              ? "io"
                         : e.kind() == ErrorKind::validation    ? "validation"
                         : e.kind() == ErrorKind::data_mismatch ? "data_mismatch"
                                                                : "invalid_argument";
      py::object type = error_type.get_stored();
      py::object exc = type(e.what());
      exc.attr("kind") = kind;
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  m.def("to_detection", [](int y) { return as_int(to_detection(ClassIndex{y})); }, py::arg("y"),
        "Detection label (0 real, 1 fake) for an attribution class.");

  m.def(
      "combine",
      [](const std::string& design, const std::vector<std::vector<double>>& rows, std::size_t k, double threshold) {
        const Design d = parse_design(design);
        return decision_dict(combine(make_tensor(required_kind(d), rows), EnsembleConfig{d, k, threshold}));
      },
      py::arg("design"), py::arg("rows"), py::arg("k"), py::arg("threshold") = 0.5,
      "Combine one sample's model rows under the named design.");

  m.def(
      "ba_detection",
      [](const std::vector<std::vector<std::uint64_t>>& cm, bool lenient) {
        return ba_detection(make_confusion(cm), mode_of(lenient));
      },
      py::arg("confusion"), py::arg("lenient") = false);
  m.def(
      "ba_attribution",
      [](const std::vector<std::vector<std::uint64_t>>& cm, bool lenient) {
        return ba_attribution(make_confusion(cm), mode_of(lenient));
      },
      py::arg("confusion"), py::arg("lenient") = false);

  m.def("default_grid", &default_grid);
  m.def("make_grid", &make_grid, py::arg("lo"), py::arg("hi"), py::arg("step"));

  m.def(
      "aggregate_identity",
      [](const std::vector<double>& scores, const std::string& reducer) {
        return aggregate_identity(scores, parse_reducer(reducer));
      },
      py::arg("scores"), py::arg("reducer") = "mean");
  m.def(
      "aggregate_video",
      [](const std::map<std::string, double>& identity_scores, std::size_t faces, double threshold,
         const std::string& reducer) {
        AggregationPolicy p;
        p.identity = parse_reducer(reducer);
        p.video_threshold = threshold;
        const VideoVerdict v = aggregate_video("video", identity_scores, faces, p);
        py::dict out;
        out["video_fake_score"] = v.video_fake_score;
        out["video_z_hat"] = as_int(v.video_z_hat);
        out["contributing_faces"] = v.contributing_faces;
        return out;
      },
      py::arg("identity_scores"), py::arg("contributing_faces"), py::arg("threshold") = 0.5,
      py::arg("reducer") = "max");

  m.def(
      "simulate",
      [](const std::string& preset_name, std::uint64_t seed, const std::string& out_dir,
         std::size_t samples_per_class, unsigned jobs) {
        OracleConfig cfg = preset(preset_name, seed);
        if (samples_per_class > 0) cfg.samples_per_class = samples_per_class;
        const SyntheticData data = [&] {
          py::gil_scoped_release release;
          return generate(cfg, jobs);
        }();
        const auto dir = std::filesystem::path(out_dir);
        std::filesystem::create_directories(dir);
        write_manifest(dir / "manifest.tsv", data.manifest);
        write_scores(dir / "scores.tsv", data.scores);
        return py::make_tuple((dir / "manifest.tsv").string(), (dir / "scores.tsv").string());
      },
      py::arg("preset"), py::arg("seed"), py::arg("out_dir"), py::arg("samples_per_class") = 0,
      py::arg("jobs") = 1, "Write a synthetic manifest and score file; returns their paths.");

  m.def(
      "evaluate_report",
      [](const std::string& manifest, const std::string& scores, const std::string& design, const std::string& task,
         double threshold, const std::string& level, bool lenient, const std::vector<std::string>& models,
         unsigned jobs) {
        EvaluationOptions o;
        o.design = parse_design(design);
        o.task = parse_task(task);
        o.threshold = threshold;
        o.level = parse_level(level);
        o.mode = mode_of(lenient);
        o.models = models;
        o.jobs = jobs;
        py::gil_scoped_release release;
        const Loaded l = load(manifest, scores);
        return render_report(evaluate(l.manifest, l.scores, o));
      },
      py::arg("manifest"), py::arg("scores"), py::arg("design"), py::arg("task"), py::arg("threshold") = 0.5,
      py::arg("level") = "face", py::arg("lenient") = false, py::arg("models") = std::vector<std::string>{},
      py::arg("jobs") = 1, "Evaluation report as a JSON document.");

  m.def(
      "sweep_csv",
      [](const std::string& manifest, const std::string& scores, const std::string& design, const std::string& task,
         std::vector<double> grid, bool lenient, const std::vector<std::string>& models, unsigned jobs) {
        SweepOptions o;
        o.design = parse_design(design);
        o.task = parse_task(task);
        o.mode = mode_of(lenient);
        o.models = models;
        o.jobs = jobs;
        if (grid.empty()) grid = default_grid();
        py::gil_scoped_release release;
        const Loaded l = load(manifest, scores);
        return render_sweep_csv(sweep(l.manifest, l.scores, grid, o));
      },
      py::arg("manifest"), py::arg("scores"), py::arg("design"), py::arg("task"),
      py::arg("grid") = std::vector<double>{}, py::arg("lenient") = false,
      py::arg("models") = std::vector<std::string>{}, py::arg("jobs") = 1, "Threshold sweep as CSV text.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run an ensdet subcommand; returns (exit code, stdout, stderr).");
}
