#include "fixtime/ensemble.hpp"

#include "json_util.hpp"

namespace fixtime {

using nlohmann::json;

namespace {

constexpr const char* kModelFormat = "fixtime.model";
constexpr int kModelVersion = 1;

}  // namespace

void to_json(json& j, const PipelineConfig& c) {
    json learners = json::object();
    for (const auto v : kAllViews) {
        learners[std::string(view_name(v))] = learn::learner_name(c.learners[index_of(v)]);
    }
    json k_range = nullptr;
    if (c.topics.k_range) {
        k_range = {{"k_min", c.topics.k_range->k_min}, {"k_max", c.topics.k_range->k_max}};
    }
    json text = {{"min_df", c.text.min_df},
                 {"max_vocab", c.text.max_vocab},
                 {"embeddings", c.text.embeddings},
                 {"stopwords_path", c.text.stopwords_path ? json(*c.text.stopwords_path) : json(nullptr)}};
    j = json{{"text", text},
             {"topics", {{"k_range", k_range}, {"top_n", c.topics.top_n}}},
             {"similarity", {{"k", c.similarity_k}}},
             {"learners", learners},
             {"logreg", c.logreg},
             {"tree", c.tree},
             {"forest", c.forest},
             {"stacking", {{"folds", c.folds}, {"naive", c.naive_stacking}}},
             {"seed", c.seed}};
}

void from_json(const json& j, PipelineConfig& c) {
    detail::check_keys(j, {"text", "topics", "similarity", "learners", "logreg", "tree", "forest", "stacking", "seed"},
                       "pipeline");
    if (const auto it = j.find("text"); it != j.end()) {
        detail::check_keys(*it, {"min_df", "max_vocab", "embeddings", "stopwords_path"}, "text");
        detail::read_optional(*it, "min_df", c.text.min_df);
        detail::read_optional(*it, "max_vocab", c.text.max_vocab);
        detail::read_optional(*it, "embeddings", c.text.embeddings);
        if (const auto sp = it->find("stopwords_path"); sp != it->end()) {
            c.text.stopwords_path = sp->is_null() ? std::nullopt : std::optional<std::string>(sp->get<std::string>());
        }
        if (c.text.min_df < 1 || c.text.max_vocab < 1) {
            throw ConfigError("text: min_df and max_vocab must be >= 1");
        }
    }
    if (const auto it = j.find("topics"); it != j.end()) {
        detail::check_keys(*it, {"k_range", "top_n"}, "topics");
        if (const auto kr = it->find("k_range"); kr != it->end()) {
            if (kr->is_null()) {
                c.topics.k_range.reset();
            } else {
                detail::check_keys(*kr, {"k_min", "k_max"}, "topics.k_range");
                topics::KRange range;
                range.k_min = kr->at("k_min").get<std::size_t>();
                range.k_max = kr->at("k_max").get<std::size_t>();
                if (range.k_min < 2 || range.k_max < range.k_min) {
                    throw ConfigError("topics.k_range: need 2 <= k_min <= k_max");
                }
                c.topics.k_range = range;
            }
        }
        detail::read_optional(*it, "top_n", c.topics.top_n);
    }
    if (const auto it = j.find("similarity"); it != j.end()) {
        detail::check_keys(*it, {"k"}, "similarity");
        detail::read_optional(*it, "k", c.similarity_k);
        if (c.similarity_k < 1) {
            throw ConfigError("similarity.k must be >= 1");
        }
    }
    if (const auto it = j.find("learners"); it != j.end()) {
        if (!it->is_object()) {
            throw ConfigError("learners: expected an object");
        }
        for (const auto& [name, value] : it->items()) {
            const auto view = parse_view(name);
            if (!view) {
                throw ConfigError("learners: unknown view '" + name + "'");
            }
            c.learners[index_of(*view)] = learn::parse_learner(value.get<std::string>());
        }
    }
    detail::read_optional(j, "logreg", c.logreg);
    detail::read_optional(j, "tree", c.tree);
    detail::read_optional(j, "forest", c.forest);
    if (const auto it = j.find("stacking"); it != j.end()) {
        detail::check_keys(*it, {"folds", "naive"}, "stacking");
        detail::read_optional(*it, "folds", c.folds);
        detail::read_optional(*it, "naive", c.naive_stacking);
        if (c.folds < 2) {
            throw ConfigError("stacking.folds must be >= 2");
        }
    }
    detail::read_optional(j, "seed", c.seed);
}

json model_to_json(const StackedModel& m) {
    json base = json::array();
    for (const auto& b : m.ensemble.base) {
        base.push_back(learn::classifier_to_json(b));
    }
    return json{{"format", kModelFormat},
                {"version", kModelVersion},
                {"project", m.project},
                {"config", m.config},
                {"stopwords", m.stopwords},
                {"vectorizer", m.vectorizer},
                {"lsa", m.lsa ? json(*m.lsa) : json(nullptr)},
                {"embedding_dim", m.embedding_dim},
                {"topics", m.topics},
                {"encoders",
                 {{"priority", m.priority},
                  {"issue_type", m.issue_type},
                  {"component", m.component},
                  {"label", m.label}}},
                {"assignees", m.assignees},
                {"similarity", m.similarity},
                {"ensemble", {{"n_classes", m.ensemble.n_classes}, {"base", base}, {"meta", m.ensemble.meta}}},
                {"n_train", m.n_train}};
}

StackedModel model_from_json(const json& j) {
    if (!j.is_object() || j.value("format", std::string()) != kModelFormat) {
        throw FormatError("not a fixtime model document");
    }
    if (j.at("version").get<int>() != kModelVersion) {
        throw FormatError("unsupported model version " + j.at("version").dump());
    }
    StackedModel m;
    m.project = j.at("project").get<std::string>();
    m.config = j.at("config").get<PipelineConfig>();
    m.stopwords = j.at("stopwords").get<text::StopwordSet>();
    m.vectorizer = j.at("vectorizer").get<text::Vectorizer>();
    if (!j.at("lsa").is_null()) {
        m.lsa = j.at("lsa").get<text::LsaModel>();
    }
    m.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    m.topics = j.at("topics").get<topics::TopicModel>();
    const auto& enc = j.at("encoders");
    m.priority = enc.at("priority").get<CategoricalEncoder>();
    m.issue_type = enc.at("issue_type").get<CategoricalEncoder>();
    m.component = enc.at("component").get<CategoricalEncoder>();
    m.label = enc.at("label").get<CategoricalEncoder>();
    m.assignees = j.at("assignees").get<AssigneeProfiles>();
    m.similarity = j.at("similarity").get<SimilarityIndex>();
    const auto& ens = j.at("ensemble");
    m.ensemble.n_classes = ens.at("n_classes").get<std::size_t>();
    for (const auto& b : ens.at("base")) {
        m.ensemble.base.push_back(learn::classifier_from_json(b));
    }
    m.ensemble.meta = ens.at("meta").get<learn::LogRegModel>();
    if (m.ensemble.base.size() != kNumViews) {
        throw FormatError("model must contain one base classifier per view");
    }
    m.n_train = j.at("n_train").get<std::size_t>();
    return m;
}

}  // namespace fixtime
