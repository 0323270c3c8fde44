#include "fixtime/ensemble.hpp"

#include <algorithm>

namespace fixtime {

namespace {

std::string class_display_name(std::size_t c, std::size_t n_classes) {
    if (n_classes == kNumCategories) {
        return std::string(category_name(kAllCategories[c]));
    }
    return std::to_string(c);
}

learn::Dataset subset(const Eigen::MatrixXd& X, std::span<const std::size_t> labels, std::span<const std::size_t> rows,
                      std::size_t n_classes) {
    learn::Dataset d;
    d.n_classes = n_classes;
    d.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    d.y.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        d.X.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
        d.y.push_back(labels[rows[i]]);
    }
    return d;
}

std::vector<double> row_of(const Eigen::MatrixXd& X, Eigen::Index r) {
    std::vector<double> out(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        out[static_cast<std::size_t>(c)] = X(r, c);
    }
    return out;
}

}  // namespace

std::vector<std::vector<double>> StackedEnsemble::base_probs(std::span<const std::vector<double>> view_rows) const {
    if (view_rows.size() != base.size()) {
        throw DimensionError("ensemble expects " + std::to_string(base.size()) + " views, got " +
                             std::to_string(view_rows.size()));
    }
    std::vector<std::vector<double>> out;
    out.reserve(base.size());
    for (std::size_t v = 0; v < base.size(); ++v) {
        out.push_back(learn::predict_proba(base[v], view_rows[v]));
    }
    return out;
}

std::vector<double> StackedEnsemble::meta_probs(std::span<const std::vector<double>> per_view) const {
    std::vector<double> concat;
    concat.reserve(per_view.size() * n_classes);
    for (const auto& p : per_view) {
        concat.insert(concat.end(), p.begin(), p.end());
    }
    return learn::predict_proba(meta, concat);
}

std::vector<std::size_t> stratified_folds(std::span<const std::size_t> labels, std::size_t n_classes,
                                          std::size_t folds, std::uint64_t seed) {
    if (folds < 2) {
        throw ConfigError("stacking: folds must be >= 2");
    }
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= n_classes) {
            throw Error("stacking: label outside [0, C)");
        }
        by_class[labels[i]].push_back(i);
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (by_class[c].size() < folds) {
            throw StratificationError(class_display_name(c, n_classes), by_class[c].size(), folds);
        }
    }
    std::vector<std::size_t> fold_of(labels.size(), 0);
    std::size_t next = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        Rng rng(mix_seed(seed, c));
        rng.shuffle(by_class[c]);
        for (const auto row : by_class[c]) {
            fold_of[row] = next;
            next = (next + 1) % folds;
        }
    }
    return fold_of;
}

StackingResult train_stacked(std::span<const Eigen::MatrixXd> views, std::span<const std::size_t> labels,
                             std::span<const learn::LearnerConfig> learners, const StackingConfig& config,
                             std::size_t n_classes) {
    if (views.empty() || learners.size() != views.size()) {
        throw Error("stacking: one learner configuration per view required");
    }
    const std::size_t n = labels.size();
    for (const auto& v : views) {
        if (static_cast<std::size_t>(v.rows()) != n) {
            throw DimensionError("stacking: every view needs one row per label");
        }
    }
    const std::size_t V = views.size();
    const auto C = static_cast<Eigen::Index>(n_classes);
    std::vector<std::size_t> all_rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        all_rows[i] = i;
    }

    StackingResult result;
    result.ensemble.n_classes = n_classes;
    for (std::size_t v = 0; v < V; ++v) {
        const learn::Dataset data = subset(views[v], labels, all_rows, n_classes);
        result.ensemble.base.push_back(learn::train_classifier(data, learners[v], mix_seed(config.seed, 100 + v)));
    }

    result.oof.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(V) * C);
    if (config.naive) {
        for (std::size_t v = 0; v < V; ++v) {
            result.oof.middleCols(static_cast<Eigen::Index>(v) * C, C) =
                learn::predict_proba(result.ensemble.base[v], views[v]);
        }
    } else {
        result.fold_of_row = stratified_folds(labels, n_classes, config.folds, mix_seed(config.seed, 1));
        for (std::size_t f = 0; f < config.folds; ++f) {
            std::vector<std::size_t> in_fold;
            std::vector<std::size_t> held_out;
            for (std::size_t i = 0; i < n; ++i) {
                (result.fold_of_row[i] == f ? held_out : in_fold).push_back(i);
            }
            for (std::size_t v = 0; v < V; ++v) {
                const learn::Dataset data = subset(views[v], labels, in_fold, n_classes);
                const auto model =
                    learn::train_classifier(data, learners[v], mix_seed(config.seed, 1000 + f * 64 + v));
                for (const auto row : held_out) {
                    const auto p = learn::predict_proba(model, row_of(views[v], static_cast<Eigen::Index>(row)));
                    for (Eigen::Index c = 0; c < C; ++c) {
                        result.oof(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(v) * C + c) =
                            p[static_cast<std::size_t>(c)];
                    }
                }
            }
            result.fold_training_rows.push_back(std::move(in_fold));
        }
    }

    learn::Dataset meta_data;
    meta_data.X = result.oof;
    meta_data.y.assign(labels.begin(), labels.end());
    meta_data.n_classes = n_classes;
    learn::LogRegConfig meta_cfg = config.meta;
    meta_cfg.seed = mix_seed(config.seed, 7);
    result.ensemble.meta = learn::train_logreg(meta_data, meta_cfg);
    return result;
}

}  // namespace fixtime
