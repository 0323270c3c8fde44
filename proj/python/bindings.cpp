#include "fixtime/config.hpp"
#include "fixtime/error.hpp"
#include "fixtime/serve.hpp"
#include "fixtime/textproc.hpp"
#include "fixtime/topics.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using nlohmann::json;

namespace {

json parse(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw fixtime::FormatError(std::string(what) + ": " + e.what());
    }
}

fixtime::ProjectConfig config_from(const std::optional<std::string>& text) {
    if (!text) {
        return {};
    }
    try {
        return parse(*text, "config").get<fixtime::ProjectConfig>();
    } catch (const json::exception& e) {
        throw fixtime::ConfigError(std::string("config: ") + e.what());
    }
}

fixtime::ProjectCorpus corpus_from(const std::string& text) { return fixtime::corpus_from_json(parse(text, "corpus")); }

std::optional<fixtime::EmbeddingTable> embeddings_for(const fixtime::PipelineConfig& config,
                                                      const fixtime::ProjectCorpus& corpus) {
    return fixtime::load_configured_embeddings(config, corpus);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Resolution-time category prediction for issue trackers";
    m.attr("__version__") = "0.1.0";

    auto base = py::register_exception<fixtime::Error>(m, "FixtimeError", PyExc_RuntimeError);
    py::register_exception<fixtime::ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<fixtime::CorpusEmpty>(m, "CorpusEmpty", base.ptr());
    py::register_exception<fixtime::ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<fixtime::OverrideError>(m, "OverrideError", base.ptr());
    py::register_exception<fixtime::StratificationError>(m, "StratificationError", base.ptr());

    m.def(
        "categorize",
        [](double days) { return std::string(fixtime::category_name(fixtime::categorize(days))); },
        py::arg("during_work_days"));

    m.def(
        "clean_text",
        [](const std::string& summary, const std::string& description) {
            return fixtime::text::clean_text(summary, description, fixtime::text::default_stopwords(), "").tokens;
        },
        py::arg("summary"), py::arg("description") = "");

    m.def("default_config", [] { return fixtime::default_config_json().dump(); });

    m.def(
        "ingest",
        [](const std::filesystem::path& dump, const std::optional<std::string>& config, bool strict,
           const std::optional<std::string>& project) {
            const auto result = fixtime::run_ingest(dump, config_from(config),
                                                    strict ? fixtime::ParseMode::Abort : fixtime::ParseMode::Skip,
                                                    project);
            return py::make_tuple(fixtime::corpus_to_json(result.corpus).dump(),
                                  fixtime::ingest_report_json(result).dump());
        },
        py::arg("dump"), py::arg("config") = py::none(), py::arg("strict") = false, py::arg("project") = py::none(),
        "Returns (corpus JSON, report JSON).");

    m.def(
        "evaluate",
        [](const std::string& corpus_text, const std::optional<std::string>& config, std::size_t seeds) {
            const auto cfg = config_from(config);
            const auto corpus = corpus_from(corpus_text);
            const auto emb = embeddings_for(cfg.pipeline, corpus);
            py::gil_scoped_release release;
            return fixtime::report_to_json(
                       fixtime::evaluate_seeds(corpus, cfg.pipeline, cfg.split, seeds, emb ? &*emb : nullptr))
                .dump();
        },
        py::arg("corpus"), py::arg("config") = py::none(), py::arg("seeds") = 1);

    m.def(
        "insights",
        [](const std::string& corpus_text) {
            return fixtime::insights_to_json(fixtime::insights(corpus_from(corpus_text))).dump();
        },
        py::arg("corpus"));

    m.def(
        "stratified_split",
        [](const std::vector<std::size_t>& labels, std::size_t n_classes, double train_ratio, std::uint64_t seed) {
            fixtime::SplitSpec spec;
            spec.train_ratio = train_ratio;
            spec.seed = seed;
            const auto s = fixtime::stratified_split(labels, n_classes, spec);
            return py::make_tuple(s.train, s.test);
        },
        py::arg("labels"), py::arg("n_classes"), py::arg("train_ratio") = 0.8, py::arg("seed") = 0);

    m.def(
        "metrics",
        [](const std::vector<std::size_t>& y_true, const std::vector<std::size_t>& y_pred, std::size_t n_classes) {
            if (y_true.size() != y_pred.size() || y_true.empty()) {
                throw fixtime::DimensionError("metrics: y_true and y_pred need equal nonzero length");
            }
            return json(fixtime::learn::metrics(y_true, y_pred, n_classes)).dump();
        },
        py::arg("y_true"), py::arg("y_pred"), py::arg("n_classes") = 4);

    py::class_<fixtime::ModelBundle>(m, "Bundle")
        .def_static("load", &fixtime::load_bundle, py::arg("path"))
        .def_static(
            "from_json", [](const std::string& text) { return fixtime::bundle_from_json(parse(text, "bundle")); },
            py::arg("text"))
        .def_static(
            "train",
            [](const std::string& corpus_text, const std::optional<std::string>& config) {
                const auto cfg = config_from(config);
                const auto corpus = corpus_from(corpus_text);
                const auto emb = embeddings_for(cfg.pipeline, corpus);
                py::gil_scoped_release release;
                return fixtime::train_bundle(corpus, cfg.pipeline, emb ? &*emb : nullptr);
            },
            py::arg("corpus"), py::arg("config") = py::none())
        .def("save", [](const fixtime::ModelBundle& b, const std::filesystem::path& p) { fixtime::save_bundle(b, p); })
        .def("to_json", [](const fixtime::ModelBundle& b) { return fixtime::bundle_to_json(b).dump(); })
        .def_property_readonly("project", [](const fixtime::ModelBundle& b) { return b.model.project; })
        .def_property_readonly("n_train", [](const fixtime::ModelBundle& b) { return b.model.n_train; })
        .def(
            "predict",
            [](const fixtime::ModelBundle& b, const std::string& issue) {
                const auto input = fixtime::prediction_input_from_json(parse(issue, "issue"));
                return fixtime::prediction_to_json(fixtime::predict(b.model, input)).dump();
            },
            py::arg("issue"))
        .def(
            "explain",
            [](const fixtime::ModelBundle& b, const std::string& issue) {
                const auto input = fixtime::prediction_input_from_json(parse(issue, "issue"));
                return fixtime::explanation_to_json(fixtime::explain(b.model, input)).dump();
            },
            py::arg("issue"))
        .def(
            "whatif",
            [](const fixtime::ModelBundle& b, const std::string& issue, const std::string& overrides) {
                const auto input = fixtime::prediction_input_from_json(parse(issue, "issue"));
                const auto ov = fixtime::overrides_from_json(parse(overrides, "overrides"));
                return fixtime::whatif_to_json(fixtime::whatif(b.model, input, ov)).dump();
            },
            py::arg("issue"), py::arg("overrides"))
        .def("topics", [](const fixtime::ModelBundle& b) { return fixtime::topics::topic_report(b.model.topics).dump(); })
        .def("insights", [](const fixtime::ModelBundle& b) { return fixtime::insights_to_json(b.insights).dump(); });

    py::class_<fixtime::Service>(m, "Service")
        .def(py::init<>())
        .def_static("from_directory", &fixtime::Service::from_directory, py::arg("path"))
        .def("add_bundle", [](fixtime::Service& s, const std::string& project,
                              const fixtime::ModelBundle& b) { s.add_bundle(project, b); })
        .def("projects", &fixtime::Service::projects)
        .def(
            "handle",
            [](const fixtime::Service& s, const std::string& method, const std::string& path, const std::string& body) {
                const auto r = s.handle(method, path, body);
                return py::make_tuple(r.status, r.body.dump());
            },
            py::arg("method"), py::arg("path"), py::arg("body") = "");
}
