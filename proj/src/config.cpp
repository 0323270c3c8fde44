#include "fixtime/config.hpp"

#include "json_util.hpp"

#include <fstream>
#include <set>

namespace fixtime {

using nlohmann::json;

namespace {

constexpr const char* kConfigFormat = "fixtime.config";

constexpr std::string_view kPipelineKeys[] = {"text",   "topics", "similarity", "learners", "logreg",
                                              "tree",   "forest", "stacking",   "seed"};

bool is_pipeline_key(std::string_view key) {
    for (const auto k : kPipelineKeys) {
        if (k == key) {
            return true;
        }
    }
    return false;
}

}  // namespace

void to_json(json& j, const ProjectConfig& c) {
    j = json{{"format", kConfigFormat},
             {"version", ProjectConfig::kVersion},
             {"status_map", c.status_map},
             {"during_work_mode", c.during_work_mode == DuringWorkMode::Elapsed ? "elapsed" : "accumulated_active"},
             {"filter", c.filter},
             {"split", c.split}};
    const json pipeline = c.pipeline;
    for (const auto& [key, value] : pipeline.items()) {
        j[key] = value;
    }
}

void from_json(const json& j, ProjectConfig& c) {
    if (!j.is_object()) {
        throw ConfigError("config: expected a JSON object");
    }
    json pipeline = json::object();
    for (const auto& [key, value] : j.items()) {
        if (key == "format") {
            if (value != kConfigFormat) {
                throw ConfigError("config: format must be '" + std::string(kConfigFormat) + "'");
            }
        } else if (key == "version") {
            if (!value.is_number_integer() || value.get<int>() != ProjectConfig::kVersion) {
                throw ConfigError("config: unsupported version " + value.dump());
            }
        } else if (key == "status_map") {
            c.status_map = value.get<StatusMap>();
        } else if (key == "during_work_mode") {
            const auto mode = value.get<std::string>();
            if (mode == "elapsed") {
                c.during_work_mode = DuringWorkMode::Elapsed;
            } else if (mode == "accumulated_active") {
                c.during_work_mode = DuringWorkMode::AccumulatedActive;
            } else {
                throw ConfigError("config: during_work_mode must be 'elapsed' or 'accumulated_active'");
            }
        } else if (key == "filter") {
            c.filter = value.get<FilterConfig>();
        } else if (key == "split") {
            c.split = value.get<SplitSpec>();
        } else if (is_pipeline_key(key)) {
            pipeline[key] = value;
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    if (j.find("version") == j.end()) {
        throw ConfigError("config: missing 'version'");
    }
    c.pipeline = pipeline.get<PipelineConfig>();
    c.split.seed = c.pipeline.seed;
}

ProjectConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    try {
        return j.get<ProjectConfig>();
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

json default_config_json() { return ProjectConfig{}; }

IngestResult run_ingest(const std::filesystem::path& dump, const ProjectConfig& config, ParseMode mode,
                        const std::optional<std::string>& project) {
    auto parsed = parse_issue_dump(dump, mode);
    IngestResult r;
    r.parsed = parsed.issues.size();
    r.malformed = std::move(parsed.malformed);
    r.rejected = std::move(parsed.rejected);
    if (project) {
        std::erase_if(parsed.issues, [&](const RawIssue& i) { return i.project != *project; });
    }
    auto filtered = filter_issues(parsed.issues, config.filter);
    r.filter = std::move(filtered.report);
    if (filtered.kept.empty()) {
        std::string reasons;
        for (const auto& [reason, n] : r.filter.rejected) {
            reasons += (reasons.empty() ? "" : ", ") + reason + " " + std::to_string(n);
        }
        throw CorpusEmpty("no issues left after filtering (" + (reasons.empty() ? "empty dump" : reasons) + ")");
    }
    auto labeled = label_corpus(std::move(filtered.kept), config.status_map, config.during_work_mode);
    r.corpus = std::move(labeled.corpus);
    r.corpus.provenance.dump_path = dump.string();
    r.corpus.provenance.filter = config.filter;
    r.label = std::move(labeled.report);
    return r;
}

json ingest_report_json(const IngestResult& r) {
    const auto lines = [](const std::vector<LineIssue>& v) {
        json out = json::array();
        for (const auto& l : v) {
            out.push_back({{"line", l.line}, {"reason", l.reason}});
        }
        return out;
    };
    return json{{"project", r.corpus.project},
                {"parsed", r.parsed},
                {"malformed", lines(r.malformed)},
                {"rejected_records", lines(r.rejected)},
                {"filter_rejected", r.filter.rejected},
                {"label_excluded", r.label.excluded},
                {"kept", r.corpus.size()}};
}

std::optional<EmbeddingTable> load_configured_embeddings(const PipelineConfig& config, const ProjectCorpus& corpus) {
    if (config.text.embeddings.kind != text::EmbeddingSource::Kind::PrecomputedFile) {
        return std::nullopt;
    }
    std::set<std::string> keys;
    for (const auto& li : corpus.issues) {
        keys.insert(li.issue.key);
    }
    return text::load_embeddings(config.text.embeddings.path, keys);
}

ModelBundle train_bundle(const ProjectCorpus& corpus, const PipelineConfig& config, const EmbeddingTable* embeddings) {
    ModelBundle b;
    b.model = fit_pipeline(corpus, config, embeddings).model;
    const auto topic_of = assign_corpus_topics(b.model, corpus, embeddings);
    b.insights = insights(corpus, std::span<const std::size_t>(topic_of));
    return b;
}

}  // namespace fixtime
