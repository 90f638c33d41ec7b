// Python bindings. Structured results (blueprints, reports, pipelines)
// cross the boundary as JSON text; edca/__init__.py turns them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "edca/analyzer.hpp"
#include "edca/dataset.hpp"
#include "edca/errors.hpp"
#include "edca/evolution.hpp"
#include "edca/harness.hpp"
#include "edca/metrics.hpp"
#include "edca/pipeline.hpp"

namespace py = pybind11;
using json = nlohmann::ordered_json;

namespace {

edca::RunConfig config_from_text(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw edca::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return edca::run_config_from_json(j, base_dir);
}

std::vector<std::size_t> all_rows(const edca::Dataset& ds) {
  std::vector<std::size_t> r(ds.n_rows());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = i;
  return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "edca native core";

  py::register_exception<edca::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<edca::DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<edca::SearchError>(m, "SearchError", PyExc_RuntimeError);
  py::register_exception<edca::PipelineFailure>(m, "PipelineFailure", PyExc_RuntimeError);

  py::class_<edca::Dataset>(m, "Dataset")
      .def_property_readonly("n_rows", &edca::Dataset::n_rows)
      .def_property_readonly("n_columns", &edca::Dataset::n_columns)
      .def_property_readonly("n_classes", &edca::Dataset::n_classes)
      .def_property_readonly("label_names", &edca::Dataset::label_names)
      .def_property_readonly("target", &edca::Dataset::target)
      .def_property_readonly("column_names",
                             [](const edca::Dataset& ds) {
                               std::vector<std::string> names;
                               for (const auto& c : ds.columns()) names.push_back(c.name);
                               return names;
                             })
      .def("to_csv", &edca::to_csv, py::arg("target_column") = "class")
      .def("__repr__", [](const edca::Dataset& ds) {
        return "<Dataset rows=" + std::to_string(ds.n_rows()) + " columns=" + std::to_string(ds.n_columns()) +
               " classes=" + std::to_string(ds.n_classes()) + ">";
      });

  m.def("load_csv",
        [](const std::filesystem::path& path, const std::string& target, std::optional<std::set<std::string>> tokens) {
          return edca::load_csv(path, target, tokens.value_or(edca::default_missing_tokens()));
        },
        py::arg("path"), py::arg("target"), py::arg("missing_tokens") = py::none());
  m.def("parse_csv",
        [](const std::string& text, const std::string& target, std::optional<std::set<std::string>> tokens) {
          return edca::parse_csv(text, target, tokens.value_or(edca::default_missing_tokens()));
        },
        py::arg("text"), py::arg("target"), py::arg("missing_tokens") = py::none());

  m.def("_generate_synthetic",
        [](const std::string& spec_json, std::uint64_t seed) {
          const auto cfg = config_from_text(json{{"synthetic", json::parse(spec_json)}}.dump(), "");
          return edca::generate_synthetic(*cfg.synthetic, seed);
        },
        py::arg("spec_json"), py::arg("seed"));

  m.def("_analyze", [](const edca::Dataset& ds) { return edca::to_json(edca::analyze(ds, all_rows(ds))).dump(); });

  m.def("mcc", [](const std::vector<int>& truth, const std::vector<int>& pred, std::size_t k) {
    if (truth.size() != pred.size()) throw edca::DataError("truth and prediction lengths differ");
    for (auto v : truth) {
      if (v < 0 || static_cast<std::size_t>(v) >= k) throw edca::DataError("label out of range");
    }
    for (auto v : pred) {
      if (v < 0 || static_cast<std::size_t>(v) >= k) throw edca::DataError("label out of range");
    }
    return edca::mcc(truth, pred, k);
  }, py::arg("truth"), py::arg("pred"), py::arg("k"));
  m.def("fitness_from_mcc", &edca::fitness_from_mcc, py::arg("mcc"));

  m.def("_run_experiment",
        [](const std::string& config_json, const std::string& base_dir, std::optional<std::string> output_dir) {
          auto cfg = config_from_text(config_json, base_dir);
          edca::RunReport report;
          {
            py::gil_scoped_release release;
            report = edca::run_experiment(cfg);
            if (output_dir) edca::emit_reports(report, *output_dir);
          }
          return report.to_json().dump();
        },
        py::arg("config_json"), py::arg("base_dir") = "", py::arg("output_dir") = py::none());

  py::class_<edca::FittedPipeline>(m, "FittedPipeline")
      .def_static("_from_json", [](const std::string& text) { return edca::FittedPipeline::from_json(json::parse(text)); })
      .def("_to_json", [](const edca::FittedPipeline& fp) { return fp.to_json().dump(); })
      .def_property_readonly("label_names", &edca::FittedPipeline::label_names)
      .def_property_readonly("target", &edca::FittedPipeline::target)
      .def("predict", [](const edca::FittedPipeline& fp, const edca::Dataset& ds) { return fp.predict(ds); });

  m.attr("__version__") = edca::kArtifactVersion;
}
