#pragma once

#include "fixtime/learners.hpp"
#include "fixtime/lifecycle.hpp"
#include "fixtime/textproc.hpp"
#include "fixtime/topics.hpp"
#include "fixtime/views.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fixtime {

// ---------------------------------------------------------------- stacking

struct StackingConfig {
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    /// Ablation only: meta inputs come from base models trained on all rows.
    bool naive = false;
    learn::LogRegConfig meta;
};

/// One base classifier per view plus the meta-learner over their
/// concatenated probabilities.
struct StackedEnsemble {
    std::vector<learn::Classifier> base;
    learn::LogRegModel meta;
    std::size_t n_classes = kNumCategories;

    [[nodiscard]] std::size_t n_views() const noexcept { return base.size(); }
    /// Per-view probability vectors for one row of each view.
    [[nodiscard]] std::vector<std::vector<double>> base_probs(std::span<const std::vector<double>> view_rows) const;
    [[nodiscard]] std::vector<double> meta_probs(std::span<const std::vector<double>> per_view) const;
};

struct StackingResult {
    StackedEnsemble ensemble;
    /// Meta-training inputs, n x (views * C).
    Eigen::MatrixXd oof;
    std::vector<std::size_t> fold_of_row;
    /// Rows each fold's base models were trained on.
    std::vector<std::vector<std::size_t>> fold_training_rows;
};

/// Rows are dealt round-robin into `folds` folds after a seeded shuffle
/// within each class. Throws StratificationError when a class present in
/// `labels` has fewer than `folds` rows.
[[nodiscard]] std::vector<std::size_t> stratified_folds(std::span<const std::size_t> labels, std::size_t n_classes,
                                                        std::size_t folds, std::uint64_t seed);

/// Trains the base learner of every view on all rows and the meta-learner
/// on out-of-fold base probabilities.
[[nodiscard]] StackingResult train_stacked(std::span<const Eigen::MatrixXd> views, std::span<const std::size_t> labels,
                                           std::span<const learn::LearnerConfig> learners,
                                           const StackingConfig& config, std::size_t n_classes = kNumCategories);

// ---------------------------------------------------------------- pipeline

struct TextConfig {
    std::size_t min_df = 2;
    std::size_t max_vocab = 20000;
    text::EmbeddingSource embeddings;
    std::optional<std::string> stopwords_path;
};

struct TopicConfig {
    /// Defaults to topics::default_k_range(number of training documents).
    std::optional<topics::KRange> k_range;
    std::size_t top_n = 10;
};

/// Decision tree for priority/type/label, forest for component/topics/
/// assignee, logistic regression for similarity.
[[nodiscard]] std::array<learn::LearnerKind, kNumViews> default_learner_assignment() noexcept;

struct PipelineConfig {
    TextConfig text;
    TopicConfig topics;
    std::size_t similarity_k = 15;
    std::array<learn::LearnerKind, kNumViews> learners = default_learner_assignment();
    learn::LogRegConfig logreg;
    learn::TreeConfig tree;
    learn::ForestConfig forest;
    std::size_t folds = 5;
    bool naive_stacking = false;
    std::uint64_t seed = 42;

    [[nodiscard]] learn::LearnerConfig learner_config(ViewKind view) const;
};

/// Document vectors supplied by an external embedding file, keyed by issue.
using EmbeddingTable = std::map<std::string, std::vector<double>>;

/// Everything needed to score a new issue.
struct StackedModel {
    std::string project;
    PipelineConfig config;
    text::StopwordSet stopwords;
    text::Vectorizer vectorizer;
    std::optional<text::LsaModel> lsa;  // builtin embeddings only
    std::size_t embedding_dim = 0;
    topics::TopicModel topics;
    CategoricalEncoder priority;
    CategoricalEncoder issue_type;
    CategoricalEncoder component;
    CategoricalEncoder label;
    AssigneeProfiles assignees;
    SimilarityIndex similarity;
    StackedEnsemble ensemble;
    std::size_t n_train = 0;
};

struct FitResult {
    StackedModel model;
    /// Training view matrices, in kAllViews order.
    std::vector<Eigen::MatrixXd> train_views;
    std::vector<std::size_t> train_labels;
    Eigen::MatrixXd oof;
};

/// Fits every component on `corpus.issues[train_rows]` only. `embeddings`
/// is required when the config selects a precomputed embedding file.
[[nodiscard]] FitResult fit_pipeline(const ProjectCorpus& corpus, std::span<const std::size_t> train_rows,
                                     const PipelineConfig& config, const EmbeddingTable* embeddings = nullptr);
/// fit_pipeline over every corpus issue.
[[nodiscard]] FitResult fit_pipeline(const ProjectCorpus& corpus, const PipelineConfig& config,
                                     const EmbeddingTable* embeddings = nullptr);

/// An issue to score, optionally with its own precomputed embedding.
struct PredictionInput {
    RawIssue issue;
    std::optional<std::vector<double>> embedding;
};

/// Lenient decoding of a request body: summary, priority and issue_type are
/// required, everything else optional. Throws ValidationError listing every
/// missing or mistyped field.
[[nodiscard]] PredictionInput prediction_input_from_json(const nlohmann::json& j);

using ClassProbs = std::array<double, kNumCategories>;

struct Prediction {
    std::string issue_key;
    ClassProbs final_probs{};
    std::array<ClassProbs, kNumViews> per_view{};
    ResolutionCategory predicted{};
};

/// Document vector of an issue under the model's embedding source. A
/// precomputed-embedding model without an embedding for the issue yields
/// the zero vector.
[[nodiscard]] std::vector<double> document_vector(const StackedModel& model, const PredictionInput& input);

/// Feature rows of all seven views for one issue.
[[nodiscard]] std::array<std::vector<double>, kNumViews> view_rows(const StackedModel& model,
                                                                   const RawIssue& issue,
                                                                   std::span<const double> doc_vector);

[[nodiscard]] Prediction predict(const StackedModel& model, const PredictionInput& input);
[[nodiscard]] Prediction predict(const StackedModel& model, const RawIssue& issue);

/// Views whose own argmax equals the final predicted category.
[[nodiscard]] std::vector<ViewKind> agreement_flags(const Prediction& prediction);

struct SimilarIssue {
    std::string issue_key;
    double similarity = 0.0;
    ResolutionCategory category{};
};

struct ViewExplanation {
    ViewKind view{};
    ResolutionCategory top_category{};
    double probability = 0.0;
    bool agrees = false;
    std::string narrative;
};

struct Explanation {
    Prediction prediction;
    std::array<ViewExplanation, kNumViews> views{};
    std::vector<ViewKind> agreement;
    std::optional<AssigneeProfile> assignee;
    std::size_t topic_id = 0;
    std::vector<topics::TopicKeyword> topic_keywords;
    std::vector<SimilarIssue> similar;
};

[[nodiscard]] Explanation explain(const StackedModel& model, const PredictionInput& input,
                                  const Prediction& prediction);
[[nodiscard]] Explanation explain(const StackedModel& model, const PredictionInput& input);

/// One-line summary of an assignee's training history, e.g.
/// "alice: 30 resolved issues, mean 6.20 days, median 5.10 days; ...".
[[nodiscard]] std::string assignee_narrative(const AssigneeProfile& profile);

struct Overrides {
    std::optional<std::string> priority;
    std::optional<std::string> issue_type;
    std::optional<std::vector<std::string>> components;
    std::optional<std::vector<std::string>> labels;
    /// Present with nullopt inside means "unassigned".
    std::optional<std::optional<std::string>> assignee;

    [[nodiscard]] bool empty() const noexcept;
    void apply(RawIssue& issue) const;
};

/// Throws OverrideError naming every key outside {priority, issue_type,
/// components, labels, assignee} and ValidationError on mistyped values.
[[nodiscard]] Overrides overrides_from_json(const nlohmann::json& j);

struct WhatIfResult {
    Prediction baseline;
    Prediction modified;
    ClassProbs delta{};
};

[[nodiscard]] WhatIfResult whatif(const StackedModel& model, const PredictionInput& input,
                                  const Overrides& overrides);

// ----------------------------------------------------------- serialization

/// `{"issue_key", "final_probs": {category: p}, "predicted", "per_view":
/// {view: {category: p}}}`; `decimals` rounds the probabilities only.
[[nodiscard]] nlohmann::json prediction_to_json(const Prediction& p, std::optional<int> decimals = std::nullopt);
[[nodiscard]] nlohmann::json explanation_to_json(const Explanation& e, std::optional<int> decimals = std::nullopt);
[[nodiscard]] nlohmann::json whatif_to_json(const WhatIfResult& w, std::optional<int> decimals = std::nullopt);

void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);

[[nodiscard]] nlohmann::json model_to_json(const StackedModel& model);
[[nodiscard]] StackedModel model_from_json(const nlohmann::json& j);

}  // namespace fixtime
