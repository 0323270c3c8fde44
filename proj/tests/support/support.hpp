#pragma once

#include "fixtime/config.hpp"
#include "fixtime/ingest.hpp"
#include "fixtime/learners.hpp"
#include "fixtime/lifecycle.hpp"
#include "fixtime/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fixtime::testing {

/// 2020-01-01T00:00:00Z.
[[nodiscard]] Timestamp t0();
[[nodiscard]] Timestamp at_days(double days);

/// An issue created at t0 whose status changelog enters each (offset days,
/// status) in the given order.
[[nodiscard]] RawIssue issue_with_statuses(std::string key, const std::vector<std::pair<double, std::string>>& path);

struct LifecycleFixture {
    std::string name;
    RawIssue issue;
    DuringWorkMode mode = DuringWorkMode::Elapsed;
    IntervalOutcome expected;
};

/// Twelve hand-built changelogs with their exact expected outcomes.
[[nodiscard]] std::vector<LifecycleFixture> lifecycle_fixtures();
/// Exact equality of two outcomes, with a readable mismatch description.
[[nodiscard]] std::optional<std::string> outcome_mismatch(const IntervalOutcome& got, const IntervalOutcome& want);

struct PlantedSpec {
    std::size_t n_issues = 2000;
    /// Probability that the priority value dictates the category.
    double signal = 0.9;
    std::uint64_t seed = 1;
    std::size_t n_assignees = 10;
    std::string project = "SYN";
};

/// Issues whose category follows priority with probability `signal` and is
/// otherwise one of the other three categories; type, component, label,
/// assignee and text are independent of the category.
[[nodiscard]] std::vector<RawIssue> planted_signal_issues(const PlantedSpec& spec);
[[nodiscard]] ProjectCorpus planted_signal_corpus(const PlantedSpec& spec);
/// Category planted for each priority value.
[[nodiscard]] ResolutionCategory planted_category(std::string_view priority);

/// A config with reduced settings that keeps a 2k-issue fit fast.
[[nodiscard]] PipelineConfig fast_pipeline_config(std::uint64_t seed = 42);

void write_dump(const std::vector<RawIssue>& issues, const std::filesystem::path& path);

/// Random dense classification data with every class present when n >= C.
[[nodiscard]] learn::Dataset random_dataset(Rng& rng, std::size_t n, std::size_t p, std::size_t n_classes,
                                            bool integer_features = false);

struct NaiveMetrics {
    double accuracy = 0.0;
    double f1_macro = 0.0;
    double f1_weighted = 0.0;
};

/// Per-class recount with explicit loops over the sample pairs.
[[nodiscard]] NaiveMetrics naive_metrics(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                                         std::size_t n_classes);

/// Largest root Gini decrease over every feature and every value split
/// `x <= v`, subject to both sides holding at least `min_leaf` rows; 0 when
/// no split is admissible or none improves.
[[nodiscard]] double brute_force_root_decrease(const learn::Dataset& data, std::size_t min_leaf);

/// Central differences of logreg_objective's loss for every weight and bias.
struct NumericGradient {
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias;
};
[[nodiscard]] NumericGradient numeric_gradient(const Eigen::MatrixXd& X, std::span<const std::size_t> y,
                                               const Eigen::MatrixXd& W, const Eigen::VectorXd& b, double l2,
                                               double h = 1e-5);

/// Softmax of the meta model over concatenated, standardized inputs,
/// computed independently of the library's prediction path.
[[nodiscard]] std::vector<double> reference_meta_probs(const learn::LogRegModel& meta, std::span<const double> x);

}  // namespace fixtime::testing
