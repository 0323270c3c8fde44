#include "fixtime/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fixtime::learn {

double gini(std::span<const double> class_weights) {
    double total = 0.0;
    for (const double w : class_weights) {
        total += w;
    }
    if (total <= 0.0) {
        return 0.0;
    }
    double sq = 0.0;
    for (const double w : class_weights) {
        const double p = w / total;
        sq += p * p;
    }
    return 1.0 - sq;
}

const TreeNode& TreeModel::leaf_for(std::span<const double> x) const {
    if (x.size() != n_features) {
        throw DimensionError("tree expects " + std::to_string(n_features) + " features, got " +
                             std::to_string(x.size()));
    }
    const TreeNode* node = &nodes.front();
    while (!node->is_leaf()) {
        node = &nodes[static_cast<std::size_t>(
            x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right)];
    }
    return *node;
}

namespace {

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double decrease = 0.0;
};

class TreeBuilder {
  public:
    TreeBuilder(const Dataset& data, std::span<const double> weights, const TreeConfig& config,
                std::size_t max_features, Rng* rng)
        : data_(data), weights_(weights), config_(config), max_features_(max_features), rng_(rng) {
        model_.n_features = data.features();
        model_.n_classes = data.n_classes;
        model_.config = config;
        all_features_.resize(data.features());
        std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
    }

    TreeModel build() && {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < data_.rows(); ++i) {
            if (weights_[i] > 0.0) {
                rows.push_back(i);
            }
        }
        grow(rows, 0);
        return std::move(model_);
    }

  private:
    std::vector<double> class_weights(const std::vector<std::size_t>& rows) const {
        std::vector<double> counts(data_.n_classes, 0.0);
        for (const auto r : rows) {
            counts[data_.y[r]] += weights_[r];
        }
        return counts;
    }

    std::vector<std::size_t> candidate_features() {
        if (rng_ == nullptr || max_features_ >= all_features_.size()) {
            return all_features_;
        }
        std::vector<std::size_t> pool = all_features_;
        for (std::size_t i = 0; i < max_features_; ++i) {
            const auto j = i + static_cast<std::size_t>(rng_->index(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(max_features_);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    std::optional<Split> best_split(const std::vector<std::size_t>& rows, const std::vector<double>& counts,
                                    double total) {
        const double parent = gini(counts);
        const auto msl = static_cast<double>(config_.min_samples_leaf);
        std::optional<Split> best;
        std::vector<double> left(data_.n_classes);
        std::vector<double> right(data_.n_classes);
        for (const auto f : candidate_features()) {
            sorted_.clear();
            const auto col = data_.X.col(static_cast<Eigen::Index>(f));
            for (const auto r : rows) {
                sorted_.emplace_back(col(static_cast<Eigen::Index>(r)), r);
            }
            std::sort(sorted_.begin(), sorted_.end());
            if (sorted_.front().first == sorted_.back().first) {
                continue;
            }
            std::fill(left.begin(), left.end(), 0.0);
            double wl = 0.0;
            for (std::size_t i = 0; i + 1 < sorted_.size(); ++i) {
                const auto r = sorted_[i].second;
                left[data_.y[r]] += weights_[r];
                wl += weights_[r];
                const double lo = sorted_[i].first;
                const double hi = sorted_[i + 1].first;
                if (lo == hi) {
                    continue;
                }
                const double wr = total - wl;
                if (wl < msl || wr < msl) {
                    continue;
                }
                for (std::size_t c = 0; c < right.size(); ++c) {
                    right[c] = counts[c] - left[c];
                }
                const double decrease = parent - (wl / total) * gini(left) - (wr / total) * gini(right);
                if (!best || decrease > best->decrease) {
                    double threshold = lo + (hi - lo) / 2.0;
                    if (threshold >= hi) {
                        threshold = lo;
                    }
                    best = Split{f, threshold, decrease};
                }
            }
        }
        return best;
    }

    int grow(std::vector<std::size_t>& rows, std::size_t depth) {
        const auto id = static_cast<int>(model_.nodes.size());
        model_.nodes.emplace_back();
        const std::vector<double> counts = class_weights(rows);
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
        {
            auto& node = model_.nodes.back();
            node.samples = total;
            node.probs.resize(counts.size());
            for (std::size_t c = 0; c < counts.size(); ++c) {
                node.probs[c] = total > 0.0 ? counts[c] / total : 1.0 / static_cast<double>(counts.size());
            }
        }
        const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
        if (pure || depth >= config_.max_depth ||
            total < 2.0 * static_cast<double>(std::max<std::size_t>(config_.min_samples_leaf, 1))) {
            return id;
        }
        const auto split = best_split(rows, counts, total);
        if (!split || split->decrease <= 0.0) {
            return id;
        }
        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        const auto col = data_.X.col(static_cast<Eigen::Index>(split->feature));
        for (const auto r : rows) {
            (col(static_cast<Eigen::Index>(r)) <= split->threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const int left = grow(left_rows, depth + 1);
        const int right = grow(right_rows, depth + 1);
        auto& node = model_.nodes[static_cast<std::size_t>(id)];
        node.feature = static_cast<int>(split->feature);
        node.threshold = split->threshold;
        node.impurity_decrease = split->decrease;
        node.left = left;
        node.right = right;
        return id;
    }

    const Dataset& data_;
    std::span<const double> weights_;
    TreeConfig config_;
    std::size_t max_features_;
    Rng* rng_;
    TreeModel model_;
    std::vector<std::size_t> all_features_;
    std::vector<std::pair<double, std::size_t>> sorted_;
};

}  // namespace

namespace detail {

TreeModel train_tree_weighted(const Dataset& data, std::span<const double> weights, const TreeConfig& config,
                              std::size_t max_features, Rng* rng) {
    data.validate();
    if (weights.size() != data.rows()) {
        throw Error("tree: one weight per row required");
    }
    return TreeBuilder(data, weights, config, max_features, rng).build();
}

}  // namespace detail

TreeModel train_tree(const Dataset& data, const TreeConfig& config) {
    const std::vector<double> ones(data.rows(), 1.0);
    return detail::train_tree_weighted(data, ones, config, data.features(), nullptr);
}

std::vector<double> predict_proba(const TreeModel& model, std::span<const double> x) {
    return model.leaf_for(x).probs;
}

ForestModel train_forest(const Dataset& data, const ForestConfig& config, std::uint64_t seed) {
    data.validate();
    if (config.n_trees < 1) {
        throw Error("forest needs at least one tree");
    }
    const std::size_t p = data.features();
    ForestModel forest;
    forest.seed = seed;
    forest.bootstrap = config.bootstrap;
    forest.n_features = p;
    forest.n_classes = data.n_classes;
    forest.features_per_split =
        std::clamp<std::size_t>(config.max_features.value_or(static_cast<std::size_t>(
                                    std::ceil(std::sqrt(static_cast<double>(p))))),
                                std::size_t{1}, std::max<std::size_t>(p, 1));
    const std::size_t n = data.rows();
    std::vector<double> weights(n);
    for (std::size_t t = 0; t < config.n_trees; ++t) {
        const std::uint64_t tree_seed = mix_seed(seed, t);
        Rng rng(tree_seed);
        if (config.bootstrap) {
            std::fill(weights.begin(), weights.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                weights[static_cast<std::size_t>(rng.index(n))] += 1.0;
            }
        } else {
            std::fill(weights.begin(), weights.end(), 1.0);
        }
        forest.trees.push_back(detail::train_tree_weighted(data, weights, config.tree, forest.features_per_split, &rng));
        forest.tree_seeds.push_back(tree_seed);
    }
    return forest;
}

std::vector<double> predict_proba(const ForestModel& model, std::span<const double> x) {
    std::vector<double> sum(model.n_classes, 0.0);
    for (const auto& tree : model.trees) {
        const auto& probs = tree.leaf_for(x).probs;
        for (std::size_t c = 0; c < sum.size(); ++c) {
            sum[c] += probs[c];
        }
    }
    const auto n = static_cast<double>(model.trees.size());
    for (auto& s : sum) {
        s /= n;
    }
    return sum;
}

}  // namespace fixtime::learn
