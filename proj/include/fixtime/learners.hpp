#pragma once

#include "fixtime/error.hpp"
#include "fixtime/random.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fixtime::learn {

struct Dataset {
    Eigen::MatrixXd X;           // n x p
    std::vector<std::size_t> y;  // class index per row
    std::size_t n_classes = 4;

    [[nodiscard]] std::size_t rows() const noexcept { return y.size(); }
    [[nodiscard]] std::size_t features() const noexcept { return static_cast<std::size_t>(X.cols()); }
    /// Throws Error on shape mismatch, non-finite X or out-of-range labels.
    void validate() const;
};

/// Zero-mean, unit-variance scaling from training statistics. Constant
/// columns keep scale 1.
struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    [[nodiscard]] static Standardizer fit(const Eigen::MatrixXd& X);
    [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

// ---------------------------------------------------------------- logistic

struct LogRegConfig {
    double l2 = 1e-3;
    double learning_rate = 0.1;
    std::size_t max_epochs = 5000;
    double tolerance = 1e-7;
    std::uint64_t seed = 0;
};

/// Multinomial logistic regression over standardized inputs.
struct LogRegModel {
    Eigen::MatrixXd weights;  // C x p
    Eigen::VectorXd bias;     // C
    Standardizer standardizer;
    double l2 = 0.0;
    std::uint64_t seed = 0;
    /// Objective value at the start of each epoch.
    std::vector<double> training_trace;

    [[nodiscard]] std::size_t n_classes() const noexcept { return static_cast<std::size_t>(weights.rows()); }
    [[nodiscard]] std::size_t n_features() const noexcept { return static_cast<std::size_t>(weights.cols()); }
};

struct Objective {
    double loss = 0.0;
    Eigen::MatrixXd grad_weights;
    Eigen::VectorXd grad_bias;
};

/// Mean cross-entropy + (l2 / 2) * ||W||^2 and its analytic gradient, on
/// already-standardized inputs. The bias is not regularized.
[[nodiscard]] Objective logreg_objective(const Eigen::MatrixXd& X, std::span<const std::size_t> y,
                                         const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias, double l2);

/// Full-batch gradient descent from zero weights; stops when the objective
/// changes by less than `tolerance`. Throws DivergenceError on a non-finite
/// loss and Error when fewer than two classes are present.
[[nodiscard]] LogRegModel train_logreg(const Dataset& data, const LogRegConfig& config);

// -------------------------------------------------------------------- tree

struct TreeConfig {
    std::size_t max_depth = 8;
    std::size_t min_samples_leaf = 5;
};

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> probs;
    double samples = 0.0;  // weighted sample count
    double impurity_decrease = 0.0;

    [[nodiscard]] bool is_leaf() const noexcept { return feature < 0; }
};

/// CART classifier; `x[feature] <= threshold` routes left.
struct TreeModel {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    std::size_t n_features = 0;
    std::size_t n_classes = 0;
    TreeConfig config;

    [[nodiscard]] const TreeNode& leaf_for(std::span<const double> x) const;
};

[[nodiscard]] double gini(std::span<const double> class_weights);

/// Greedy Gini partitioning over midpoints of consecutive distinct values;
/// ties go to the lower feature index, then the lower threshold.
[[nodiscard]] TreeModel train_tree(const Dataset& data, const TreeConfig& config);

namespace detail {
/// Weighted variant used by the forest: `weights[i]` is the multiplicity of
/// row i, and `max_features` features are sampled per split from `rng`.
[[nodiscard]] TreeModel train_tree_weighted(const Dataset& data, std::span<const double> weights,
                                            const TreeConfig& config, std::size_t max_features, Rng* rng);
}  // namespace detail

// ------------------------------------------------------------------ forest

struct ForestConfig {
    std::size_t n_trees = 100;
    TreeConfig tree;
    bool bootstrap = true;
    /// Defaults to ceil(sqrt(p)).
    std::optional<std::size_t> max_features;
};

struct ForestModel {
    std::vector<TreeModel> trees;
    std::vector<std::uint64_t> tree_seeds;
    std::size_t features_per_split = 0;
    std::uint64_t seed = 0;
    bool bootstrap = true;
    std::size_t n_features = 0;
    std::size_t n_classes = 0;
};

[[nodiscard]] ForestModel train_forest(const Dataset& data, const ForestConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------- dispatch

using Classifier = std::variant<LogRegModel, TreeModel, ForestModel>;

enum class LearnerKind { LogisticRegression, DecisionTree, RandomForest };

[[nodiscard]] std::string_view learner_name(LearnerKind kind) noexcept;
[[nodiscard]] LearnerKind parse_learner(std::string_view name);

struct LearnerConfig {
    LearnerKind kind = LearnerKind::LogisticRegression;
    LogRegConfig logreg;
    TreeConfig tree;
    ForestConfig forest;
};

[[nodiscard]] Classifier train_classifier(const Dataset& data, const LearnerConfig& config, std::uint64_t seed);

/// Class probabilities for one row. Throws DimensionError on a width mismatch.
[[nodiscard]] std::vector<double> predict_proba(const LogRegModel& model, std::span<const double> x);
[[nodiscard]] std::vector<double> predict_proba(const TreeModel& model, std::span<const double> x);
[[nodiscard]] std::vector<double> predict_proba(const ForestModel& model, std::span<const double> x);
[[nodiscard]] std::vector<double> predict_proba(const Classifier& model, std::span<const double> x);
/// Row-wise probabilities, n x C.
[[nodiscard]] Eigen::MatrixXd predict_proba(const Classifier& model, const Eigen::MatrixXd& X);

[[nodiscard]] std::size_t n_features(const Classifier& model);
[[nodiscard]] std::size_t n_classes(const Classifier& model);

/// Index of the largest entry; ties go to the lowest index.
[[nodiscard]] std::size_t argmax(std::span<const double> v);

// ----------------------------------------------------------------- metrics

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct ClassificationMetrics {
    double accuracy = 0.0;
    /// Mean F1 over classes present in the truth or the predictions.
    double f1_macro = 0.0;
    /// Support-weighted F1.
    double f1_weighted = 0.0;
    std::vector<std::vector<std::size_t>> confusion;  // [true][pred]
    std::vector<ClassMetrics> per_class;
};

[[nodiscard]] ClassificationMetrics metrics(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                                            std::size_t n_classes);
[[nodiscard]] ClassificationMetrics metrics_from_confusion(const std::vector<std::vector<std::size_t>>& confusion);

// ----------------------------------------------------------- serialization

void to_json(nlohmann::json& j, const Standardizer& s);
void from_json(const nlohmann::json& j, Standardizer& s);
void to_json(nlohmann::json& j, const LogRegModel& m);
void from_json(const nlohmann::json& j, LogRegModel& m);
void to_json(nlohmann::json& j, const TreeModel& m);
void from_json(const nlohmann::json& j, TreeModel& m);
void to_json(nlohmann::json& j, const ForestModel& m);
void from_json(const nlohmann::json& j, ForestModel& m);
[[nodiscard]] nlohmann::json classifier_to_json(const Classifier& c);
[[nodiscard]] Classifier classifier_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const LogRegConfig& c);
void from_json(const nlohmann::json& j, LogRegConfig& c);
void to_json(nlohmann::json& j, const TreeConfig& c);
void from_json(const nlohmann::json& j, TreeConfig& c);
void to_json(nlohmann::json& j, const ForestConfig& c);
void from_json(const nlohmann::json& j, ForestConfig& c);
void to_json(nlohmann::json& j, const ClassificationMetrics& m);

}  // namespace fixtime::learn
