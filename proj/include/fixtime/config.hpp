#pragma once

#include "fixtime/ensemble.hpp"
#include "fixtime/eval.hpp"
#include "fixtime/ingest.hpp"
#include "fixtime/lifecycle.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>

namespace fixtime {

/// Per-project settings for every pipeline stage. Stored as a versioned
/// JSON document; unknown keys are rejected.
struct ProjectConfig {
    static constexpr int kVersion = 1;

    StatusMap status_map;
    DuringWorkMode during_work_mode = DuringWorkMode::Elapsed;
    FilterConfig filter;
    PipelineConfig pipeline;
    SplitSpec split;
};

void to_json(nlohmann::json& j, const ProjectConfig& c);
void from_json(const nlohmann::json& j, ProjectConfig& c);

/// Throws ConfigError naming the offending key or value.
[[nodiscard]] ProjectConfig load_config(const std::filesystem::path& path);
/// The fully materialized default configuration.
[[nodiscard]] nlohmann::json default_config_json();

struct IngestResult {
    ProjectCorpus corpus;
    std::size_t parsed = 0;
    std::vector<LineIssue> malformed;
    std::vector<LineIssue> rejected;
    FilterReport filter;
    LabelReport label;
};

/// parse -> filter -> label. `project`, when set, keeps only that project's
/// records. Throws ParseError (abort mode) and CorpusEmptyError.
[[nodiscard]] IngestResult run_ingest(const std::filesystem::path& dump, const ProjectConfig& config,
                                      ParseMode mode = ParseMode::Skip,
                                      const std::optional<std::string>& project = std::nullopt);
[[nodiscard]] nlohmann::json ingest_report_json(const IngestResult& r);

/// Embedding rows for every corpus issue when the pipeline uses a
/// precomputed file, nullopt for the builtin source.
[[nodiscard]] std::optional<EmbeddingTable> load_configured_embeddings(const PipelineConfig& config,
                                                                       const ProjectCorpus& corpus);

/// Fits on the whole corpus and attaches its insight tables, including the
/// per-topic table under the fitted model.
[[nodiscard]] ModelBundle train_bundle(const ProjectCorpus& corpus, const PipelineConfig& config,
                                       const EmbeddingTable* embeddings = nullptr);

}  // namespace fixtime
