#pragma once

#include "fixtime/textproc.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fixtime::topics {

struct KMeansOptions {
    std::size_t max_iterations = 300;
    double tolerance = 1e-6;  // max centroid shift (Euclidean)
};

struct KMeansResult {
    Eigen::MatrixXd centroids;  // k x d
    std::vector<std::size_t> assignment;
    /// Inertia after each assignment step.
    std::vector<double> inertia_trace;
    double inertia = 0.0;
    std::size_t iterations = 0;
};

/// Lloyd iterations from k-means++ seeding. Empty clusters keep their centroid.
[[nodiscard]] KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                                  const KMeansOptions& options = {});

/// Mean silhouette coefficient; singleton clusters score 0.
[[nodiscard]] double silhouette(const Eigen::MatrixXd& points, std::span<const std::size_t> assignment,
                                std::size_t k);

struct TopicKeyword {
    std::string token;
    double score = 0.0;
};

struct KRange {
    std::size_t k_min = 5;
    std::size_t k_max = 30;
};

/// Default candidate range [5, min(30, floor(n / 200) + 5)].
[[nodiscard]] KRange default_k_range(std::size_t n_docs);

struct TopicModel {
    Eigen::MatrixXd centroids;  // k x d
    std::vector<std::size_t> sizes;
    std::vector<std::vector<TopicKeyword>> keywords;
    std::uint64_t seed = 0;
    /// (candidate k, mean silhouette).
    std::vector<std::pair<std::size_t, double>> selection_trace;

    [[nodiscard]] std::size_t k() const noexcept { return static_cast<std::size_t>(centroids.rows()); }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(centroids.cols()); }
};

struct TopicAssignment {
    std::string issue_key;
    std::size_t topic_id = 0;
    double distance = 0.0;
};

struct TopicFit {
    TopicModel model;
    std::vector<std::size_t> assignment;  // per input row
    double inertia = 0.0;
};

/// Runs k-means for every k in range and keeps the best mean silhouette
/// (ties go to the smaller k). Silhouettes are computed on a seeded sample
/// of at most `silhouette_sample` points. Throws TooFewDocuments when there
/// are not at least k_min + 1 rows.
[[nodiscard]] TopicFit fit_topics(const Eigen::MatrixXd& vectors, KRange range, std::uint64_t seed,
                                  std::size_t silhouette_sample = 2000);
[[nodiscard]] TopicFit fit_topics(std::span<const text::DocVector> vectors, KRange range, std::uint64_t seed);

/// Class-based TF-IDF: score(t, c) = tf(t, c) * ln(1 + A / f(t)), with A the
/// mean token count per topic and f(t) the frequency of t over all topics.
[[nodiscard]] std::vector<std::vector<TopicKeyword>> topic_keywords(std::size_t k,
                                                                    std::span<const text::TokenizedDoc> docs,
                                                                    std::span<const std::size_t> assignment,
                                                                    std::size_t top_n);

/// Nearest centroid; ties resolve to the lowest topic id.
[[nodiscard]] TopicAssignment assign_topic(std::span<const double> vector, const TopicModel& model);
[[nodiscard]] TopicAssignment assign_topic(const text::DocVector& vector, const TopicModel& model);

/// `{"k": int, "topics": [{"id", "size", "keywords": [[token, score], ...]}]}`
[[nodiscard]] nlohmann::json topic_report(const TopicModel& model);

void to_json(nlohmann::json& j, const TopicModel& m);
void from_json(const nlohmann::json& j, TopicModel& m);

}  // namespace fixtime::topics
