#pragma once

#include "fixtime/ensemble.hpp"
#include "fixtime/learners.hpp"
#include "fixtime/lifecycle.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fixtime {

struct SplitSpec {
    double train_ratio = 0.8;
    std::uint64_t seed = 0;
    /// Earliest-created issues of each class go to training instead of a
    /// random subset.
    bool temporal = false;

    void validate() const;
};

struct Split {
    std::vector<std::size_t> train;  // ascending
    std::vector<std::size_t> test;   // ascending
};

/// Per class c with n_c members, floor(ratio * n_c) rows go to training;
/// the remaining round(ratio * n) - sum of floors are handed out by largest
/// fractional remainder (ties to the lower class index). Throws
/// StratificationError for a class with exactly one member.
[[nodiscard]] Split stratified_split(std::span<const std::size_t> labels, std::size_t n_classes, const SplitSpec& spec,
                                     std::span<const Timestamp> created_at = {});
/// Per-class training counts used by stratified_split.
[[nodiscard]] std::vector<std::size_t> allocate_train_counts(std::span<const std::size_t> class_counts, double ratio);

struct EvalReport {
    learn::ClassificationMetrics metrics;
    std::array<double, kNumViews> solo_accuracy{};
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::uint64_t seed = 0;
};

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
};

struct MultiSeedReport {
    std::vector<EvalReport> runs;
    MeanStd accuracy;
    MeanStd f1_macro;
    MeanStd f1_weighted;
};

/// Splits, fits the full pipeline on the training rows and scores the test
/// rows. The split and the pipeline use `split.seed` and `config.seed`.
[[nodiscard]] EvalReport evaluate(const ProjectCorpus& corpus, const PipelineConfig& config, const SplitSpec& split,
                                  const EmbeddingTable* embeddings = nullptr);
/// Runs evaluate for seeds base, base+1, ...; each run reseeds both the
/// split and the pipeline.
[[nodiscard]] MultiSeedReport evaluate_seeds(const ProjectCorpus& corpus, const PipelineConfig& config,
                                             const SplitSpec& split, std::size_t n_seeds,
                                             const EmbeddingTable* embeddings = nullptr);
[[nodiscard]] MeanStd mean_std(std::span<const double> values);

struct CrossTab {
    std::string dimension;
    std::vector<std::string> rows;
    std::vector<CategoryCounts> counts;

    [[nodiscard]] std::size_t total() const;
    /// Each row divided by its sum.
    [[nodiscard]] std::vector<std::array<double, kNumCategories>> proportions() const;
};

struct InsightTables {
    std::size_t corpus_size = 0;
    CrossTab by_priority;
    CrossTab by_issue_type;
    CrossTab by_component;
    std::optional<CrossTab> by_topic;
};

/// Category counts per trimmed priority, issue type and primary component
/// value, and per topic when `topic_of_issue` is given. Throws CorpusEmpty
/// on an empty corpus.
[[nodiscard]] InsightTables insights(const ProjectCorpus& corpus,
                                     std::optional<std::span<const std::size_t>> topic_of_issue = std::nullopt);
/// Topic of every corpus issue under a trained model.
[[nodiscard]] std::vector<std::size_t> assign_corpus_topics(const StackedModel& model, const ProjectCorpus& corpus,
                                                            const EmbeddingTable* embeddings = nullptr);

[[nodiscard]] nlohmann::json report_to_json(const EvalReport& r);
[[nodiscard]] nlohmann::json report_to_json(const MultiSeedReport& r);
[[nodiscard]] nlohmann::json insights_to_json(const InsightTables& t);
[[nodiscard]] InsightTables insights_from_json(const nlohmann::json& j);
/// `dimension,value,<4 categories>,total` rows of counts.
[[nodiscard]] std::string crosstab_csv(const CrossTab& t);
/// The same with row-normalized proportions.
[[nodiscard]] std::string crosstab_proportions_csv(const CrossTab& t);
/// Writes one counts CSV and one proportions CSV per table into `dir`.
std::vector<std::filesystem::path> write_insight_csvs(const InsightTables& t, const std::filesystem::path& dir);
[[nodiscard]] std::string report_csv(const MultiSeedReport& r);

void to_json(nlohmann::json& j, const SplitSpec& s);
void from_json(const nlohmann::json& j, SplitSpec& s);

/// A trained model together with the insight tables of its corpus.
struct ModelBundle {
    StackedModel model;
    InsightTables insights;
};

[[nodiscard]] nlohmann::json bundle_to_json(const ModelBundle& b);
[[nodiscard]] ModelBundle bundle_from_json(const nlohmann::json& j);
void save_bundle(const ModelBundle& b, const std::filesystem::path& path);
[[nodiscard]] ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace fixtime
