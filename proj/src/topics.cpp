#include "fixtime/topics.hpp"

#include "fixtime/random.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace fixtime::topics {

using nlohmann::json;

namespace {

double squared_distance(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b, Eigen::Index j) {
    return (a.row(i) - b.row(j)).squaredNorm();
}

/// Nearest centroid per row; returns total inertia. Candidates are ranked by
/// the expanded form |c|^2 - 2 x.c, the inertia uses exact differences.
double assign_all(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids, std::vector<std::size_t>& out) {
    const Eigen::MatrixXd cross = points * centroids.transpose();
    const Eigen::VectorXd centroid_norms = centroids.rowwise().squaredNorm();
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index arg = 0;
        for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
            const double d = centroid_norms(c) - 2.0 * cross(i, c);
            if (d < best) {
                best = d;
                arg = c;
            }
        }
        out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(arg);
        inertia += squared_distance(points, i, centroids, arg);
    }
    return inertia;
}

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& points, std::size_t k, Rng& rng) {
    const auto n = points.rows();
    Eigen::MatrixXd centroids(static_cast<Eigen::Index>(k), points.cols());
    std::vector<double> closest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    auto first = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
    centroids.row(0) = points.row(first);
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = squared_distance(points, i, centroids, static_cast<Eigen::Index>(c - 1));
            closest[static_cast<std::size_t>(i)] = std::min(closest[static_cast<std::size_t>(i)], d);
            total += closest[static_cast<std::size_t>(i)];
        }
        Eigen::Index pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += closest[static_cast<std::size_t>(i)];
                if (acc > target && closest[static_cast<std::size_t>(i)] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
        }
        centroids.row(static_cast<Eigen::Index>(c)) = points.row(pick);
    }
    return centroids;
}

double silhouette_from_distances(const Eigen::MatrixXd& dist, std::span<const std::size_t> labels, std::size_t k) {
    const auto n = static_cast<std::size_t>(dist.rows());
    std::vector<std::size_t> counts(k, 0);
    for (const auto l : labels) {
        ++counts[l];
    }
    const auto occupied = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
    if (occupied < 2) {
        return 0.0;
    }
    double sum = 0.0;
    std::vector<double> per_cluster(k);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t own = labels[i];
        if (counts[own] <= 1) {
            continue;  // contributes 0
        }
        std::fill(per_cluster.begin(), per_cluster.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            per_cluster[labels[j]] += dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        const double a = per_cluster[own] / static_cast<double>(counts[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c != own && counts[c] > 0) {
                b = std::min(b, per_cluster[c] / static_cast<double>(counts[c]));
            }
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) {
            sum += (b - a) / denom;
        }
    }
    return sum / static_cast<double>(n);
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
    const Eigen::MatrixXd cols = points.transpose();
    const auto n = cols.cols();
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = (cols.col(i) - cols.col(j)).norm();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (k == 0 || k > n) {
        throw DimensionError("k-means needs 1 <= k <= number of points");
    }
    Rng rng(seed);
    KMeansResult result;
    result.centroids = kmeans_plus_plus(points, k, rng);
    result.assignment.assign(n, 0);
    result.inertia = assign_all(points, result.centroids, result.assignment);
    result.inertia_trace.push_back(result.inertia);

    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), points.cols());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums.row(static_cast<Eigen::Index>(result.assignment[i])) += points.row(static_cast<Eigen::Index>(i));
            ++counts[result.assignment[i]];
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                continue;
            }
            const Eigen::RowVectorXd updated = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
            shift = std::max(shift, (updated - result.centroids.row(static_cast<Eigen::Index>(c))).norm());
            result.centroids.row(static_cast<Eigen::Index>(c)) = updated;
        }
        result.inertia = assign_all(points, result.centroids, result.assignment);
        result.inertia_trace.push_back(result.inertia);
        result.iterations = it;
        if (shift <= options.tolerance) {
            break;
        }
    }
    return result;
}

double silhouette(const Eigen::MatrixXd& points, std::span<const std::size_t> assignment, std::size_t k) {
    return silhouette_from_distances(pairwise_distances(points), assignment, k);
}

KRange default_k_range(std::size_t n_docs) { return KRange{5, std::min<std::size_t>(30, n_docs / 200 + 5)}; }

TopicFit fit_topics(const Eigen::MatrixXd& vectors, KRange range, std::uint64_t seed, std::size_t silhouette_sample) {
    const auto n = static_cast<std::size_t>(vectors.rows());
    if (range.k_min < 2) {
        throw Error("topic k_min must be >= 2");
    }
    if (n < range.k_min + 1) {
        throw TooFewDocuments("topic fitting needs at least " + std::to_string(range.k_min + 1) + " documents, got " +
                              std::to_string(n));
    }
    const std::size_t k_max = std::max(range.k_min, std::min(range.k_max, n - 1));

    std::vector<std::size_t> sample(n);
    std::iota(sample.begin(), sample.end(), std::size_t{0});
    if (n > silhouette_sample) {
        Rng rng(mix_seed(seed, 0x5117));
        rng.shuffle(sample);
        sample.resize(silhouette_sample);
        std::sort(sample.begin(), sample.end());
    }
    Eigen::MatrixXd sampled(static_cast<Eigen::Index>(sample.size()), vectors.cols());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        sampled.row(static_cast<Eigen::Index>(i)) = vectors.row(static_cast<Eigen::Index>(sample[i]));
    }
    const Eigen::MatrixXd dist = pairwise_distances(sampled);

    TopicFit best;
    double best_score = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> labels(sample.size());
    for (std::size_t k = range.k_min; k <= k_max; ++k) {
        auto km = kmeans(vectors, k, mix_seed(seed, k));
        for (std::size_t i = 0; i < sample.size(); ++i) {
            labels[i] = km.assignment[sample[i]];
        }
        const double score = silhouette_from_distances(dist, labels, k);
        best.model.selection_trace.emplace_back(k, score);
        if (score > best_score) {
            best_score = score;
            best.model.centroids = std::move(km.centroids);
            best.assignment = std::move(km.assignment);
            best.inertia = km.inertia;
        }
    }
    best.model.seed = seed;
    best.model.sizes.assign(best.model.k(), 0);
    for (const auto a : best.assignment) {
        ++best.model.sizes[a];
    }
    best.model.keywords.assign(best.model.k(), {});
    return best;
}

TopicFit fit_topics(std::span<const text::DocVector> vectors, KRange range, std::uint64_t seed) {
    if (vectors.empty()) {
        throw TooFewDocuments("topic fitting needs documents");
    }
    const std::size_t d = vectors.front().values.size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].values.size() != d) {
            throw DimensionError("document vectors differ in dimension");
        }
        for (std::size_t j = 0; j < d; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[i].values[j];
        }
    }
    return fit_topics(m, range, seed);
}

std::vector<std::vector<TopicKeyword>> topic_keywords(std::size_t k, std::span<const text::TokenizedDoc> docs,
                                                      std::span<const std::size_t> assignment, std::size_t top_n) {
    if (docs.size() != assignment.size()) {
        throw DimensionError("topic_keywords: one assignment per document required");
    }
    std::vector<std::map<std::string, double>> tf(k);
    std::map<std::string, double> total;
    double tokens = 0.0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (assignment[i] >= k) {
            throw DimensionError("topic_keywords: topic id out of range");
        }
        for (const auto& t : docs[i].tokens) {
            tf[assignment[i]][t] += 1.0;
            total[t] += 1.0;
            tokens += 1.0;
        }
    }
    const double mean_tokens = tokens / static_cast<double>(k);
    std::vector<std::vector<TopicKeyword>> out(k);
    for (std::size_t c = 0; c < k; ++c) {
        for (const auto& [token, count] : tf[c]) {
            out[c].push_back({token, count * std::log(1.0 + mean_tokens / total[token])});
        }
        std::stable_sort(out[c].begin(), out[c].end(),
                         [](const TopicKeyword& a, const TopicKeyword& b) { return a.score > b.score; });
        if (out[c].size() > top_n) {
            out[c].resize(top_n);
        }
    }
    return out;
}

TopicAssignment assign_topic(std::span<const double> vector, const TopicModel& model) {
    if (vector.size() != model.dim()) {
        throw DimensionError("vector dimension " + std::to_string(vector.size()) + " != topic dimension " +
                             std::to_string(model.dim()));
    }
    const Eigen::Map<const Eigen::RowVectorXd> v(vector.data(), static_cast<Eigen::Index>(vector.size()));
    TopicAssignment out;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < model.centroids.rows(); ++c) {
        const double d = (model.centroids.row(c) - v).squaredNorm();
        if (d < best) {
            best = d;
            out.topic_id = static_cast<std::size_t>(c);
        }
    }
    out.distance = std::sqrt(best);
    return out;
}

TopicAssignment assign_topic(const text::DocVector& vector, const TopicModel& model) {
    auto out = assign_topic(std::span<const double>(vector.values), model);
    out.issue_key = vector.issue_key;
    return out;
}

json topic_report(const TopicModel& model) {
    json topics = json::array();
    for (std::size_t c = 0; c < model.k(); ++c) {
        json keywords = json::array();
        if (c < model.keywords.size()) {
            for (const auto& kw : model.keywords[c]) {
                keywords.push_back(json::array({kw.token, kw.score}));
            }
        }
        topics.push_back({{"id", c}, {"size", c < model.sizes.size() ? model.sizes[c] : 0}, {"keywords", keywords}});
    }
    return json{{"k", model.k()}, {"topics", topics}};
}

void to_json(json& j, const TopicModel& m) {
    json keywords = json::array();
    for (const auto& list : m.keywords) {
        json l = json::array();
        for (const auto& kw : list) {
            l.push_back(json::array({kw.token, kw.score}));
        }
        keywords.push_back(l);
    }
    j = json{{"centroids", detail::matrix_to_json(m.centroids)},
             {"sizes", m.sizes},
             {"keywords", keywords},
             {"seed", m.seed},
             {"selection_trace", m.selection_trace}};
}

void from_json(const json& j, TopicModel& m) {
    m.centroids = detail::matrix_from_json(j.at("centroids"));
    m.sizes = j.at("sizes").get<std::vector<std::size_t>>();
    m.keywords.clear();
    for (const auto& list : j.at("keywords")) {
        std::vector<TopicKeyword> kws;
        for (const auto& kw : list) {
            kws.push_back({kw.at(0).get<std::string>(), kw.at(1).get<double>()});
        }
        m.keywords.push_back(std::move(kws));
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.selection_trace = j.at("selection_trace").get<std::vector<std::pair<std::size_t, double>>>();
}

}  // namespace fixtime::topics
