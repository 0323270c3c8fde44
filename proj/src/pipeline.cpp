#include "fixtime/ensemble.hpp"

#include <algorithm>
#include <set>

namespace fixtime {

std::array<learn::LearnerKind, kNumViews> default_learner_assignment() noexcept {
    using K = learn::LearnerKind;
    return {K::DecisionTree, K::DecisionTree, K::RandomForest, K::DecisionTree,
            K::RandomForest, K::RandomForest, K::LogisticRegression};
}

learn::LearnerConfig PipelineConfig::learner_config(ViewKind view) const {
    learn::LearnerConfig cfg;
    cfg.kind = learners[index_of(view)];
    cfg.logreg = logreg;
    cfg.tree = tree;
    cfg.forest = forest;
    return cfg;
}

namespace {

std::vector<double> topic_row(const topics::TopicModel& model, std::span<const double> doc_vector) {
    const auto a = topics::assign_topic(doc_vector, model);
    std::vector<double> row(model.k() + 1, 0.0);
    row[a.topic_id] = 1.0;
    row[model.k()] = a.distance;
    return row;
}

template <typename Row>
void set_row(Eigen::MatrixXd& m, Eigen::Index r, const Row& values) {
    for (std::size_t c = 0; c < values.size(); ++c) {
        m(r, static_cast<Eigen::Index>(c)) = values[c];
    }
}

Eigen::MatrixXd one_hot_matrix(const CategoricalEncoder& enc, std::span<const std::string> values) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(values.size()),
                                              static_cast<Eigen::Index>(enc.dim()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (const auto idx = enc.find(values[i])) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*idx)) = 1.0;
        }
    }
    return m;
}

topics::KRange clamp_range(topics::KRange range, std::size_t n_docs) {
    if (n_docs < 3) {
        throw TooFewDocuments("topic model needs at least 3 documents with tokens, got " + std::to_string(n_docs));
    }
    range.k_max = std::min(range.k_max, n_docs - 1);
    range.k_min = std::clamp<std::size_t>(range.k_min, 2, range.k_max);
    return range;
}

}  // namespace

FitResult fit_pipeline(const ProjectCorpus& corpus, const PipelineConfig& config, const EmbeddingTable* embeddings) {
    std::vector<std::size_t> rows(corpus.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = i;
    }
    return fit_pipeline(corpus, rows, config, embeddings);
}

FitResult fit_pipeline(const ProjectCorpus& corpus, std::span<const std::size_t> train_rows,
                       const PipelineConfig& config, const EmbeddingTable* embeddings) {
    if (train_rows.empty()) {
        throw CorpusEmpty("no training rows");
    }
    {
        std::set<std::size_t> unique(train_rows.begin(), train_rows.end());
        if (unique.size() != train_rows.size() || *unique.rbegin() >= corpus.size()) {
            throw Error("training rows must be distinct corpus indices");
        }
    }
    const std::size_t n = train_rows.size();
    std::vector<const LabeledIssue*> train;
    std::vector<std::size_t> labels;
    std::vector<std::string> keys;
    for (const auto r : train_rows) {
        train.push_back(&corpus.issues[r]);
        labels.push_back(index_of(corpus.issues[r].category));
        keys.push_back(corpus.issues[r].issue.key);
    }

    FitResult out;
    StackedModel& model = out.model;
    model.project = corpus.project;
    model.config = config;
    model.n_train = n;
    model.stopwords = config.text.stopwords_path ? text::load_stopwords(*config.text.stopwords_path)
                                                 : text::default_stopwords();

    std::vector<text::TokenizedDoc> docs;
    docs.reserve(n);
    for (const auto* li : train) {
        docs.push_back(text::clean_text(li->issue.summary, li->issue.description, model.stopwords, li->issue.key));
    }

    // Document vectors of the training rows.
    Eigen::MatrixXd doc_vectors;
    const bool builtin = config.text.embeddings.kind == text::EmbeddingSource::Kind::BuiltinTfidfLsa;
    if (builtin) {
        model.vectorizer = text::fit_vectorizer(docs, config.text.min_df, config.text.max_vocab);
        std::vector<text::SparseVector> sparse;
        sparse.reserve(n);
        for (const auto& d : docs) {
            sparse.push_back(text::vectorize(d, model.vectorizer));
        }
        const std::size_t d = std::min({config.text.embeddings.dimension, n, model.vectorizer.size()});
        auto lsa = text::reduce_dimensionality(sparse, model.vectorizer.size(), d, mix_seed(config.seed, 1));
        doc_vectors = std::move(lsa.projection);
        model.lsa = std::move(lsa.model);
    } else {
        if (embeddings == nullptr || embeddings->empty()) {
            throw ConfigError("precomputed embeddings selected but no embedding table supplied");
        }
        model.embedding_dim = embeddings->begin()->second.size();
        doc_vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(model.embedding_dim));
        for (std::size_t i = 0; i < n; ++i) {
            const auto it = embeddings->find(keys[i]);
            if (it == embeddings->end()) {
                throw MissingEmbedding(keys[i]);
            }
            if (it->second.size() != model.embedding_dim) {
                throw FormatError("embedding for '" + keys[i] + "' has the wrong dimension");
            }
            set_row(doc_vectors, static_cast<Eigen::Index>(i), it->second);
        }
    }
    model.embedding_dim = static_cast<std::size_t>(doc_vectors.cols());

    // Topics over documents that kept at least one token.
    std::vector<std::size_t> topic_rows;
    for (std::size_t i = 0; i < n; ++i) {
        if (!builtin || !docs[i].tokens.empty()) {
            topic_rows.push_back(i);
        }
    }
    Eigen::MatrixXd topic_input(static_cast<Eigen::Index>(topic_rows.size()), doc_vectors.cols());
    std::vector<text::TokenizedDoc> topic_docs;
    for (std::size_t i = 0; i < topic_rows.size(); ++i) {
        topic_input.row(static_cast<Eigen::Index>(i)) = doc_vectors.row(static_cast<Eigen::Index>(topic_rows[i]));
        topic_docs.push_back(docs[topic_rows[i]]);
    }
    const topics::KRange range =
        clamp_range(config.topics.k_range.value_or(topics::default_k_range(topic_rows.size())), topic_rows.size());
    auto topic_fit = topics::fit_topics(topic_input, range, mix_seed(config.seed, 2));
    topic_fit.model.keywords =
        topics::topic_keywords(topic_fit.model.k(), topic_docs, topic_fit.assignment, config.topics.top_n);
    model.topics = std::move(topic_fit.model);

    // Encoders and profiles.
    std::vector<std::string> priorities;
    std::vector<std::string> types;
    std::vector<std::string> components;
    std::vector<std::string> label_values;
    std::vector<AssigneeProfiles::Row> profile_rows;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& issue = train[i]->issue;
        priorities.push_back(issue.priority);
        types.push_back(issue.issue_type);
        components.push_back(primary(issue.components));
        label_values.push_back(primary(issue.labels));
        profile_rows.push_back({issue.assignee, primary(issue.components), train[i]->intervals.during_work, labels[i]});
    }
    model.priority = CategoricalEncoder::fit(priorities, labels);
    model.issue_type = CategoricalEncoder::fit(types, labels);
    model.component = CategoricalEncoder::fit(components, labels);
    model.label = CategoricalEncoder::fit(label_values, labels);
    model.assignees = AssigneeProfiles::fit(profile_rows);
    model.similarity = SimilarityIndex::build(keys, doc_vectors, labels, config.similarity_k);

    // Training view matrices. Similarity neighbourhoods leave each row out.
    Eigen::MatrixXd topics_view(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(model.topics.k() + 1));
    std::vector<double> buf(static_cast<std::size_t>(doc_vectors.cols()));
    for (std::size_t i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < doc_vectors.cols(); ++c) {
            buf[static_cast<std::size_t>(c)] = doc_vectors(static_cast<Eigen::Index>(i), c);
        }
        set_row(topics_view, static_cast<Eigen::Index>(i), topic_row(model.topics, buf));
    }
    out.train_views = {one_hot_matrix(model.priority, priorities),
                       one_hot_matrix(model.issue_type, types),
                       one_hot_matrix(model.component, components),
                       one_hot_matrix(model.label, label_values),
                       model.assignees.training_features(profile_rows),
                       std::move(topics_view),
                       model.similarity.features_batch(doc_vectors, keys)};

    std::vector<learn::LearnerConfig> learners;
    for (const auto v : kAllViews) {
        learners.push_back(config.learner_config(v));
    }
    StackingConfig stacking;
    stacking.folds = config.folds;
    stacking.seed = mix_seed(config.seed, 3);
    stacking.naive = config.naive_stacking;
    stacking.meta = config.logreg;
    auto stacked = train_stacked(out.train_views, labels, learners, stacking);
    model.ensemble = std::move(stacked.ensemble);
    out.oof = std::move(stacked.oof);
    out.train_labels = std::move(labels);
    return out;
}

std::vector<double> document_vector(const StackedModel& model, const PredictionInput& input) {
    if (model.lsa) {
        const auto doc = text::clean_text(input.issue.summary, input.issue.description, model.stopwords);
        return model.lsa->transform(text::vectorize(doc, model.vectorizer));
    }
    if (input.embedding) {
        if (input.embedding->size() != model.embedding_dim) {
            throw DimensionError("embedding has " + std::to_string(input.embedding->size()) + " entries, model uses " +
                                 std::to_string(model.embedding_dim));
        }
        return *input.embedding;
    }
    return std::vector<double>(model.embedding_dim, 0.0);
}

std::array<std::vector<double>, kNumViews> view_rows(const StackedModel& model, const RawIssue& issue,
                                                     std::span<const double> doc_vector) {
    const std::string comp = primary(issue.components);
    return {model.priority.encode(issue.priority),
            model.issue_type.encode(issue.issue_type),
            model.component.encode(comp),
            model.label.encode(primary(issue.labels)),
            model.assignees.features(issue.assignee, comp),
            topic_row(model.topics, doc_vector),
            model.similarity.features(doc_vector)};
}

Prediction predict(const StackedModel& model, const PredictionInput& input) {
    const auto doc = document_vector(model, input);
    const auto rows = view_rows(model, input.issue, doc);
    const auto per_view = model.ensemble.base_probs(rows);
    const auto final_probs = model.ensemble.meta_probs(per_view);
    Prediction p;
    p.issue_key = input.issue.key;
    for (std::size_t v = 0; v < kNumViews; ++v) {
        std::copy(per_view[v].begin(), per_view[v].end(), p.per_view[v].begin());
    }
    std::copy(final_probs.begin(), final_probs.end(), p.final_probs.begin());
    p.predicted = kAllCategories[learn::argmax(p.final_probs)];
    return p;
}

Prediction predict(const StackedModel& model, const RawIssue& issue) { return predict(model, PredictionInput{issue, {}}); }

std::vector<ViewKind> agreement_flags(const Prediction& prediction) {
    std::vector<ViewKind> out;
    for (const auto v : kAllViews) {
        if (kAllCategories[learn::argmax(prediction.per_view[index_of(v)])] == prediction.predicted) {
            out.push_back(v);
        }
    }
    return out;
}

}  // namespace fixtime
