#include "fixtime/learners.hpp"

#include "json_util.hpp"

namespace fixtime::learn {

std::string_view learner_name(LearnerKind kind) noexcept {
    switch (kind) {
        case LearnerKind::LogisticRegression:
            return "logreg";
        case LearnerKind::DecisionTree:
            return "tree";
        case LearnerKind::RandomForest:
            return "forest";
    }
    return "logreg";
}

LearnerKind parse_learner(std::string_view name) {
    if (name == "logreg") {
        return LearnerKind::LogisticRegression;
    }
    if (name == "tree") {
        return LearnerKind::DecisionTree;
    }
    if (name == "forest") {
        return LearnerKind::RandomForest;
    }
    throw ConfigError("unknown learner '" + std::string(name) + "' (expected logreg, tree or forest)");
}

Classifier train_classifier(const Dataset& data, const LearnerConfig& config, std::uint64_t seed) {
    switch (config.kind) {
        case LearnerKind::LogisticRegression: {
            LogRegConfig cfg = config.logreg;
            cfg.seed = seed;
            return train_logreg(data, cfg);
        }
        case LearnerKind::DecisionTree:
            return train_tree(data, config.tree);
        case LearnerKind::RandomForest:
            return train_forest(data, config.forest, seed);
    }
    throw Error("unreachable learner kind");
}

std::vector<double> predict_proba(const Classifier& model, std::span<const double> x) {
    return std::visit([&](const auto& m) { return predict_proba(m, x); }, model);
}

Eigen::MatrixXd predict_proba(const Classifier& model, const Eigen::MatrixXd& X) {
    const auto C = static_cast<Eigen::Index>(n_classes(model));
    Eigen::MatrixXd out(X.rows(), C);
    std::vector<double> row(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            row[static_cast<std::size_t>(j)] = X(i, j);
        }
        const auto p = predict_proba(model, row);
        for (Eigen::Index c = 0; c < C; ++c) {
            out(i, c) = p[static_cast<std::size_t>(c)];
        }
    }
    return out;
}

std::size_t n_features(const Classifier& model) {
    return std::visit(
        [](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LogRegModel>) {
                return m.n_features();
            } else {
                return m.n_features;
            }
        },
        model);
}

std::size_t n_classes(const Classifier& model) {
    return std::visit(
        [](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LogRegModel>) {
                return m.n_classes();
            } else {
                return m.n_classes;
            }
        },
        model);
}

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) {
            best = i;
        }
    }
    return best;
}

// ----------------------------------------------------------- serialization

void to_json(nlohmann::json& j, const Standardizer& s) {
    j = nlohmann::json{{"mean", fixtime::detail::vector_to_json(s.mean.transpose())},
                       {"scale", fixtime::detail::vector_to_json(s.scale.transpose())}};
}

void from_json(const nlohmann::json& j, Standardizer& s) {
    s.mean = fixtime::detail::vector_from_json(j.at("mean")).transpose();
    s.scale = fixtime::detail::vector_from_json(j.at("scale")).transpose();
    if (s.mean.size() != s.scale.size()) {
        throw FormatError("standardizer: mean and scale lengths differ");
    }
}

void to_json(nlohmann::json& j, const LogRegModel& m) {
    j = nlohmann::json{{"weights", fixtime::detail::matrix_to_json(m.weights)},
                       {"bias", fixtime::detail::vector_to_json(m.bias)},
                       {"standardizer", m.standardizer},
                       {"l2", m.l2},
                       {"seed", m.seed},
                       {"training_trace", m.training_trace}};
}

void from_json(const nlohmann::json& j, LogRegModel& m) {
    m.weights = fixtime::detail::matrix_from_json(j.at("weights"));
    m.bias = fixtime::detail::vector_from_json(j.at("bias"));
    m.standardizer = j.at("standardizer").get<Standardizer>();
    m.l2 = j.at("l2").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.training_trace = j.at("training_trace").get<std::vector<double>>();
    if (m.bias.size() != m.weights.rows() || m.standardizer.mean.size() != m.weights.cols()) {
        throw FormatError("logistic model: inconsistent shapes");
    }
}

void to_json(nlohmann::json& j, const TreeConfig& c) {
    j = nlohmann::json{{"max_depth", c.max_depth}, {"min_samples_leaf", c.min_samples_leaf}};
}

void from_json(const nlohmann::json& j, TreeConfig& c) {
    fixtime::detail::check_keys(j, {"max_depth", "min_samples_leaf"}, "tree");
    fixtime::detail::read_optional(j, "max_depth", c.max_depth);
    fixtime::detail::read_optional(j, "min_samples_leaf", c.min_samples_leaf);
}

void to_json(nlohmann::json& j, const TreeModel& m) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : m.nodes) {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"probs", n.probs},
                         {"samples", n.samples},
                         {"impurity_decrease", n.impurity_decrease}});
    }
    j = nlohmann::json{
        {"n_features", m.n_features}, {"n_classes", m.n_classes}, {"config", m.config}, {"nodes", nodes}};
}

void from_json(const nlohmann::json& j, TreeModel& m) {
    m.n_features = j.at("n_features").get<std::size_t>();
    m.n_classes = j.at("n_classes").get<std::size_t>();
    m.config = j.at("config").get<TreeConfig>();
    m.nodes.clear();
    for (const auto& n : j.at("nodes")) {
        TreeNode node;
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.probs = n.at("probs").get<std::vector<double>>();
        node.samples = n.at("samples").get<double>();
        node.impurity_decrease = n.at("impurity_decrease").get<double>();
        m.nodes.push_back(std::move(node));
    }
    const auto count = static_cast<int>(m.nodes.size());
    if (count == 0) {
        throw FormatError("tree: no nodes");
    }
    for (const auto& node : m.nodes) {
        if (!node.is_leaf() && (node.left <= 0 || node.right <= 0 || node.left >= count || node.right >= count ||
                                static_cast<std::size_t>(node.feature) >= m.n_features)) {
            throw FormatError("tree: invalid node reference");
        }
        if (node.probs.size() != m.n_classes) {
            throw FormatError("tree: probability vector length mismatch");
        }
    }
}

void to_json(nlohmann::json& j, const ForestConfig& c) {
    j = nlohmann::json{{"n_trees", c.n_trees}, {"tree", c.tree}, {"bootstrap", c.bootstrap}};
    j["max_features"] = c.max_features ? nlohmann::json(*c.max_features) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ForestConfig& c) {
    fixtime::detail::check_keys(j, {"n_trees", "tree", "bootstrap", "max_features"}, "forest");
    fixtime::detail::read_optional(j, "n_trees", c.n_trees);
    fixtime::detail::read_optional(j, "tree", c.tree);
    fixtime::detail::read_optional(j, "bootstrap", c.bootstrap);
    if (auto it = j.find("max_features"); it != j.end()) {
        c.max_features = it->is_null() ? std::nullopt : std::optional<std::size_t>(it->get<std::size_t>());
    }
}

void to_json(nlohmann::json& j, const ForestModel& m) {
    j = nlohmann::json{{"trees", m.trees},
                       {"tree_seeds", m.tree_seeds},
                       {"features_per_split", m.features_per_split},
                       {"seed", m.seed},
                       {"bootstrap", m.bootstrap},
                       {"n_features", m.n_features},
                       {"n_classes", m.n_classes}};
}

void from_json(const nlohmann::json& j, ForestModel& m) {
    m.trees = j.at("trees").get<std::vector<TreeModel>>();
    m.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
    m.features_per_split = j.at("features_per_split").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.bootstrap = j.at("bootstrap").get<bool>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.n_classes = j.at("n_classes").get<std::size_t>();
    if (m.trees.empty()) {
        throw FormatError("forest: no trees");
    }
}

nlohmann::json classifier_to_json(const Classifier& c) {
    return std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            LearnerKind kind = LearnerKind::LogisticRegression;
            if constexpr (std::is_same_v<T, TreeModel>) {
                kind = LearnerKind::DecisionTree;
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                kind = LearnerKind::RandomForest;
            }
            return nlohmann::json{{"kind", learner_name(kind)}, {"model", m}};
        },
        c);
}

Classifier classifier_from_json(const nlohmann::json& j) {
    switch (parse_learner(j.at("kind").get<std::string>())) {
        case LearnerKind::LogisticRegression:
            return j.at("model").get<LogRegModel>();
        case LearnerKind::DecisionTree:
            return j.at("model").get<TreeModel>();
        case LearnerKind::RandomForest:
            return j.at("model").get<ForestModel>();
    }
    throw FormatError("unreachable learner kind");
}

void to_json(nlohmann::json& j, const LogRegConfig& c) {
    j = nlohmann::json{{"l2", c.l2},
                       {"learning_rate", c.learning_rate},
                       {"max_epochs", c.max_epochs},
                       {"tolerance", c.tolerance}};
}

void from_json(const nlohmann::json& j, LogRegConfig& c) {
    fixtime::detail::check_keys(j, {"l2", "learning_rate", "max_epochs", "tolerance"}, "logreg");
    fixtime::detail::read_optional(j, "l2", c.l2);
    fixtime::detail::read_optional(j, "learning_rate", c.learning_rate);
    fixtime::detail::read_optional(j, "max_epochs", c.max_epochs);
    fixtime::detail::read_optional(j, "tolerance", c.tolerance);
    if (c.l2 < 0.0 || c.learning_rate <= 0.0 || c.tolerance < 0.0) {
        throw ConfigError("logreg: l2 and tolerance must be >= 0 and learning_rate > 0");
    }
}

}  // namespace fixtime::learn
