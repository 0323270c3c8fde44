#include "fixtime/eval.hpp"

#include "fixtime/strings.hpp"
#include "json_util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace fixtime {

using nlohmann::json;

void SplitSpec::validate() const {
    if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
        throw ConfigError("split.train_ratio must lie strictly between 0 and 1");
    }
}

std::vector<std::size_t> allocate_train_counts(std::span<const std::size_t> class_counts, double ratio) {
    const std::size_t n = std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0});
    const auto target = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    std::vector<std::size_t> out(class_counts.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < class_counts.size(); ++c) {
        const double exact = ratio * static_cast<double>(class_counts[c]);
        out[c] = std::min(class_counts[c], static_cast<std::size_t>(std::floor(exact)));
        assigned += out[c];
        remainders.emplace_back(exact - static_cast<double>(out[c]), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < target && i < remainders.size(); ++i) {
        const std::size_t c = remainders[i].second;
        if (out[c] < class_counts[c]) {
            ++out[c];
            ++assigned;
        }
    }
    return out;
}

Split stratified_split(std::span<const std::size_t> labels, std::size_t n_classes, const SplitSpec& spec,
                       std::span<const Timestamp> created_at) {
    spec.validate();
    if (spec.temporal && created_at.size() != labels.size()) {
        throw Error("temporal split needs one creation time per label");
    }
    std::vector<std::vector<std::size_t>> members(n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= n_classes) {
            throw Error("split: label outside [0, C)");
        }
        members[labels[i]].push_back(i);
    }
    std::vector<std::size_t> counts;
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (members[c].size() == 1) {
            const std::string name =
                n_classes == kNumCategories ? std::string(category_name(kAllCategories[c])) : std::to_string(c);
            throw StratificationError(name, 1, 2);
        }
        counts.push_back(members[c].size());
    }
    const auto train_counts = allocate_train_counts(counts, spec.train_ratio);
    Split out;
    for (std::size_t c = 0; c < n_classes; ++c) {
        auto& m = members[c];
        if (spec.temporal) {
            std::stable_sort(m.begin(), m.end(),
                             [&](std::size_t a, std::size_t b) { return created_at[a] < created_at[b]; });
        } else {
            Rng rng(mix_seed(spec.seed, c));
            rng.shuffle(m);
        }
        out.train.insert(out.train.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(train_counts[c]));
        out.test.insert(out.test.end(), m.begin() + static_cast<std::ptrdiff_t>(train_counts[c]), m.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

namespace {

PredictionInput input_for(const RawIssue& issue, const EmbeddingTable* embeddings) {
    PredictionInput in{issue, std::nullopt};
    if (embeddings != nullptr) {
        if (const auto it = embeddings->find(issue.key); it != embeddings->end()) {
            in.embedding = it->second;
        }
    }
    return in;
}

}  // namespace

EvalReport evaluate(const ProjectCorpus& corpus, const PipelineConfig& config, const SplitSpec& split,
                    const EmbeddingTable* embeddings) {
    if (corpus.issues.empty()) {
        throw CorpusEmpty("cannot evaluate an empty corpus");
    }
    std::vector<std::size_t> labels;
    std::vector<Timestamp> created;
    for (const auto& li : corpus.issues) {
        labels.push_back(index_of(li.category));
        created.push_back(li.issue.created_at);
    }
    const Split s = stratified_split(labels, kNumCategories, split, created);
    if (s.test.empty()) {
        throw Error("split left no test rows");
    }
    const FitResult fit = fit_pipeline(corpus, s.train, config, embeddings);

    std::vector<std::size_t> y_true;
    std::vector<std::size_t> y_pred;
    std::array<std::size_t, kNumViews> solo_correct{};
    for (const auto row : s.test) {
        const auto& li = corpus.issues[row];
        const Prediction p = predict(fit.model, input_for(li.issue, embeddings));
        const std::size_t truth = index_of(li.category);
        y_true.push_back(truth);
        y_pred.push_back(index_of(p.predicted));
        for (std::size_t v = 0; v < kNumViews; ++v) {
            solo_correct[v] += learn::argmax(p.per_view[v]) == truth ? 1 : 0;
        }
    }
    EvalReport r;
    r.metrics = learn::metrics(y_true, y_pred, kNumCategories);
    for (std::size_t v = 0; v < kNumViews; ++v) {
        r.solo_accuracy[v] = static_cast<double>(solo_correct[v]) / static_cast<double>(s.test.size());
    }
    r.n_train = s.train.size();
    r.n_test = s.test.size();
    r.seed = split.seed;
    return r;
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd out;
    if (values.empty()) {
        return out;
    }
    const auto n = static_cast<double>(values.size());
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (const double v : values) {
        ss += (v - out.mean) * (v - out.mean);
    }
    out.stddev = std::sqrt(ss / n);
    return out;
}

MultiSeedReport evaluate_seeds(const ProjectCorpus& corpus, const PipelineConfig& config, const SplitSpec& split,
                               std::size_t n_seeds, const EmbeddingTable* embeddings) {
    if (n_seeds < 1) {
        throw ConfigError("at least one seed required");
    }
    MultiSeedReport out;
    std::vector<double> acc;
    std::vector<double> f1m;
    std::vector<double> f1w;
    for (std::size_t i = 0; i < n_seeds; ++i) {
        SplitSpec s = split;
        s.seed = split.seed + i;
        PipelineConfig c = config;
        c.seed = config.seed + i;
        out.runs.push_back(evaluate(corpus, c, s, embeddings));
        acc.push_back(out.runs.back().metrics.accuracy);
        f1m.push_back(out.runs.back().metrics.f1_macro);
        f1w.push_back(out.runs.back().metrics.f1_weighted);
    }
    out.accuracy = mean_std(acc);
    out.f1_macro = mean_std(f1m);
    out.f1_weighted = mean_std(f1w);
    return out;
}

// ----------------------------------------------------------------- insights

std::size_t CrossTab::total() const {
    std::size_t t = 0;
    for (const auto& row : counts) {
        t += std::accumulate(row.begin(), row.end(), std::size_t{0});
    }
    return t;
}

std::vector<std::array<double, kNumCategories>> CrossTab::proportions() const {
    std::vector<std::array<double, kNumCategories>> out;
    for (const auto& row : counts) {
        const auto sum = static_cast<double>(std::accumulate(row.begin(), row.end(), std::size_t{0}));
        std::array<double, kNumCategories> p{};
        for (std::size_t c = 0; c < kNumCategories; ++c) {
            p[c] = sum > 0.0 ? static_cast<double>(row[c]) / sum : 0.0;
        }
        out.push_back(p);
    }
    return out;
}

namespace {

CrossTab tally(std::string dimension, const ProjectCorpus& corpus,
               const std::function<std::string(const RawIssue&)>& value_of) {
    std::map<std::string, CategoryCounts> counts;
    for (const auto& li : corpus.issues) {
        std::string v(trim(value_of(li.issue)));
        if (v.empty()) {
            v = "(none)";
        }
        ++counts[v][index_of(li.category)];
    }
    CrossTab t;
    t.dimension = std::move(dimension);
    for (const auto& [value, row] : counts) {
        t.rows.push_back(value);
        t.counts.push_back(row);
    }
    return t;
}

}  // namespace

InsightTables insights(const ProjectCorpus& corpus, std::optional<std::span<const std::size_t>> topic_of_issue) {
    if (corpus.issues.empty()) {
        throw CorpusEmpty("insights need a nonempty corpus");
    }
    InsightTables t;
    t.corpus_size = corpus.size();
    t.by_priority = tally("priority", corpus, [](const RawIssue& i) { return i.priority; });
    t.by_issue_type = tally("issue_type", corpus, [](const RawIssue& i) { return i.issue_type; });
    t.by_component = tally("component", corpus, [](const RawIssue& i) { return primary(i.components); });
    if (topic_of_issue) {
        if (topic_of_issue->size() != corpus.size()) {
            throw Error("insights: one topic per corpus issue required");
        }
        std::map<std::size_t, CategoryCounts> counts;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            ++counts[(*topic_of_issue)[i]][index_of(corpus.issues[i].category)];
        }
        CrossTab topic;
        topic.dimension = "topic";
        for (const auto& [id, row] : counts) {
            topic.rows.push_back(std::to_string(id));
            topic.counts.push_back(row);
        }
        t.by_topic = std::move(topic);
    }
    return t;
}

std::vector<std::size_t> assign_corpus_topics(const StackedModel& model, const ProjectCorpus& corpus,
                                              const EmbeddingTable* embeddings) {
    std::vector<std::size_t> out;
    out.reserve(corpus.size());
    for (const auto& li : corpus.issues) {
        const auto doc = document_vector(model, input_for(li.issue, embeddings));
        out.push_back(topics::assign_topic(doc, model.topics).topic_id);
    }
    return out;
}

// ------------------------------------------------------------ serialization

namespace {

json crosstab_json(const CrossTab& t) {
    json rows = json::array();
    const auto props = t.proportions();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        json counts = json::object();
        json proportions = json::object();
        for (const auto c : kAllCategories) {
            counts[std::string(category_name(c))] = t.counts[r][index_of(c)];
            proportions[std::string(category_name(c))] = props[r][index_of(c)];
        }
        rows.push_back({{"value", t.rows[r]}, {"counts", counts}, {"proportions", proportions}});
    }
    return json{{"dimension", t.dimension}, {"total", t.total()}, {"rows", rows}};
}

CrossTab crosstab_from(const json& j) {
    CrossTab t;
    t.dimension = j.at("dimension").get<std::string>();
    for (const auto& row : j.at("rows")) {
        t.rows.push_back(row.at("value").get<std::string>());
        CategoryCounts counts{};
        for (const auto c : kAllCategories) {
            counts[index_of(c)] = row.at("counts").at(std::string(category_name(c))).get<std::size_t>();
        }
        t.counts.push_back(counts);
    }
    return t;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (const char ch : s) {
        out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    }
    return out + "\"";
}

std::string csv_header(bool with_total) {
    std::string h = "dimension,value";
    for (const auto c : kAllCategories) {
        h += ',';
        h += category_name(c);
    }
    return h + (with_total ? ",total\n" : "\n");
}

}  // namespace

std::string crosstab_csv(const CrossTab& t) {
    std::string out = csv_header(true);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out += t.dimension + ',' + csv_field(t.rows[r]);
        std::size_t sum = 0;
        for (const auto v : t.counts[r]) {
            out += fmt::format(",{}", v);
            sum += v;
        }
        out += fmt::format(",{}\n", sum);
    }
    return out;
}

std::string crosstab_proportions_csv(const CrossTab& t) {
    std::string out = csv_header(false);
    const auto props = t.proportions();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out += t.dimension + ',' + csv_field(t.rows[r]);
        for (const auto v : props[r]) {
            out += fmt::format(",{:.6f}", v);
        }
        out += '\n';
    }
    return out;
}

std::vector<std::filesystem::path> write_insight_csvs(const InsightTables& t, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<const CrossTab*> tables{&t.by_priority, &t.by_issue_type, &t.by_component};
    if (t.by_topic) {
        tables.push_back(&*t.by_topic);
    }
    std::vector<std::filesystem::path> written;
    for (const auto* table : tables) {
        for (const bool proportions : {false, true}) {
            const auto path = dir / ("by_" + table->dimension + (proportions ? "_proportions" : "") + ".csv");
            std::ofstream out(path);
            if (!out) {
                throw Error("cannot write " + path.string());
            }
            out << (proportions ? crosstab_proportions_csv(*table) : crosstab_csv(*table));
            written.push_back(path);
        }
    }
    return written;
}

json insights_to_json(const InsightTables& t) {
    return json{{"corpus_size", t.corpus_size},
                {"by_priority", crosstab_json(t.by_priority)},
                {"by_issue_type", crosstab_json(t.by_issue_type)},
                {"by_component", crosstab_json(t.by_component)},
                {"by_topic", t.by_topic ? crosstab_json(*t.by_topic) : json(nullptr)}};
}

InsightTables insights_from_json(const json& j) {
    InsightTables t;
    t.corpus_size = j.at("corpus_size").get<std::size_t>();
    t.by_priority = crosstab_from(j.at("by_priority"));
    t.by_issue_type = crosstab_from(j.at("by_issue_type"));
    t.by_component = crosstab_from(j.at("by_component"));
    if (const auto it = j.find("by_topic"); it != j.end() && !it->is_null()) {
        t.by_topic = crosstab_from(*it);
    }
    return t;
}

json report_to_json(const EvalReport& r) {
    json solo = json::object();
    for (const auto v : kAllViews) {
        solo[std::string(view_name(v))] = r.solo_accuracy[index_of(v)];
    }
    json metrics = r.metrics;
    return json{{"seed", r.seed},
                {"n_train", r.n_train},
                {"n_test", r.n_test},
                {"accuracy", r.metrics.accuracy},
                {"f1_macro", r.metrics.f1_macro},
                {"f1_weighted", r.metrics.f1_weighted},
                {"confusion", r.metrics.confusion},
                {"per_class", metrics.at("per_class")},
                {"solo_accuracy", solo}};
}

json report_to_json(const MultiSeedReport& r) {
    json runs = json::array();
    for (const auto& run : r.runs) {
        runs.push_back(report_to_json(run));
    }
    const auto ms = [](const MeanStd& m) { return json{{"mean", m.mean}, {"stddev", m.stddev}}; };
    return json{{"runs", runs},
                {"accuracy", ms(r.accuracy)},
                {"f1_macro", ms(r.f1_macro)},
                {"f1_weighted", ms(r.f1_weighted)}};
}

std::string report_csv(const MultiSeedReport& r) {
    std::string out = "seed,n_train,n_test,accuracy,f1_macro,f1_weighted";
    for (const auto v : kAllViews) {
        out += fmt::format(",solo_{}", view_name(v));
    }
    out += '\n';
    for (const auto& run : r.runs) {
        out += fmt::format("{},{},{},{:.6f},{:.6f},{:.6f}", run.seed, run.n_train, run.n_test, run.metrics.accuracy,
                           run.metrics.f1_macro, run.metrics.f1_weighted);
        for (const double a : run.solo_accuracy) {
            out += fmt::format(",{:.6f}", a);
        }
        out += '\n';
    }
    return out;
}

void to_json(json& j, const SplitSpec& s) {
    j = json{{"train_ratio", s.train_ratio}, {"temporal", s.temporal}};
}

void from_json(const json& j, SplitSpec& s) {
    detail::check_keys(j, {"train_ratio", "temporal"}, "split");
    detail::read_optional(j, "train_ratio", s.train_ratio);
    detail::read_optional(j, "temporal", s.temporal);
    s.validate();
}

// ------------------------------------------------------------------- bundle

namespace {

constexpr const char* kBundleFormat = "fixtime.bundle";
constexpr int kBundleVersion = 1;

}  // namespace

json bundle_to_json(const ModelBundle& b) {
    return json{{"format", kBundleFormat},
                {"version", kBundleVersion},
                {"model", model_to_json(b.model)},
                {"insights", insights_to_json(b.insights)}};
}

ModelBundle bundle_from_json(const json& j) {
    if (!j.is_object() || j.value("format", std::string()) != kBundleFormat) {
        throw FormatError("not a fixtime bundle");
    }
    if (j.at("version").get<int>() != kBundleVersion) {
        throw FormatError("unsupported bundle version " + j.at("version").dump());
    }
    return ModelBundle{model_from_json(j.at("model")), insights_from_json(j.at("insights"))};
}

void save_bundle(const ModelBundle& b, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << bundle_to_json(b).dump() << '\n';
    if (!out) {
        throw Error("failed writing " + path.string());
    }
}

ModelBundle load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return bundle_from_json(j);
}

}  // namespace fixtime
