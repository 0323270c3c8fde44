#include "fixtime/ensemble.hpp"

#include "fixtime/strings.hpp"

#include <fmt/format.h>

#include <cmath>

namespace fixtime {

using nlohmann::json;

// ------------------------------------------------------------------- input

namespace {

bool is_string_array(const json& v) {
    if (!v.is_array()) {
        return false;
    }
    for (const auto& e : v) {
        if (!e.is_string()) {
            return false;
        }
    }
    return true;
}

}  // namespace

PredictionInput prediction_input_from_json(const json& j) {
    if (!j.is_object()) {
        throw ValidationError("request body must be a JSON object", {});
    }
    std::vector<std::string> bad;
    PredictionInput in;
    RawIssue& issue = in.issue;
    const auto required_string = [&](const char* key, std::string& out) {
        const auto it = j.find(key);
        if (it == j.end() || !it->is_string()) {
            bad.emplace_back(key);
        } else {
            out = it->get<std::string>();
        }
    };
    const auto optional_string = [&](const char* key, std::string& out) {
        const auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            return;
        }
        if (!it->is_string()) {
            bad.emplace_back(key);
        } else {
            out = it->get<std::string>();
        }
    };
    const auto nullable_string = [&](const char* key, std::optional<std::string>& out) {
        const auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            return;
        }
        if (!it->is_string()) {
            bad.emplace_back(key);
        } else if (const auto s = it->get<std::string>(); !trim(s).empty()) {
            out = s;
        }
    };
    const auto string_list = [&](const char* key, std::vector<std::string>& out) {
        const auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            return;
        }
        if (!is_string_array(*it)) {
            bad.emplace_back(key);
        } else {
            out = it->get<std::vector<std::string>>();
        }
    };

    issue.key = "draft";
    optional_string("key", issue.key);
    optional_string("project", issue.project);
    required_string("summary", issue.summary);
    optional_string("description", issue.description);
    required_string("priority", issue.priority);
    required_string("issue_type", issue.issue_type);
    optional_string("status", issue.status);
    nullable_string("resolution", issue.resolution);
    nullable_string("assignee", issue.assignee);
    string_list("components", issue.components);
    string_list("labels", issue.labels);
    if (const auto it = j.find("created_at"); it != j.end() && !it->is_null()) {
        const auto ts = it->is_string() ? parse_timestamp(it->get<std::string>()) : std::nullopt;
        if (ts) {
            issue.created_at = *ts;
        } else {
            bad.emplace_back("created_at");
        }
    }
    if (const auto it = j.find("changelog"); it != j.end() && !it->is_null() && !it->is_array()) {
        bad.emplace_back("changelog");
    }
    if (const auto it = j.find("embedding"); it != j.end() && !it->is_null()) {
        bool ok = it->is_array();
        std::vector<double> values;
        if (ok) {
            for (const auto& v : *it) {
                if (!v.is_number()) {
                    ok = false;
                    break;
                }
                values.push_back(v.get<double>());
            }
        }
        if (ok) {
            in.embedding = std::move(values);
        } else {
            bad.emplace_back("embedding");
        }
    }
    if (!bad.empty()) {
        std::string msg = "invalid or missing fields:";
        for (const auto& f : bad) {
            msg += ' ' + f;
        }
        throw ValidationError(msg, std::move(bad));
    }
    return in;
}

// -------------------------------------------------------------- narratives

namespace {

std::string percent(std::size_t part, std::size_t whole) {
    return fmt::format("{:.1f}%", whole > 0 ? 100.0 * static_cast<double>(part) / static_cast<double>(whole) : 0.0);
}

std::size_t dominant(const CategoryCounts& counts) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[best]) {
            best = c;
        }
    }
    return best;
}

std::string categorical_narrative(std::string_view what, const CategoricalEncoder& enc, std::string_view raw) {
    const auto idx = enc.find(raw);
    const std::string shown = normalize_value(raw);
    if (!idx) {
        return fmt::format("{} '{}' was not seen in training; the view falls back to an all-zero encoding", what,
                           shown);
    }
    const auto& counts = enc.counts[*idx];
    std::size_t total = 0;
    for (const auto c : counts) {
        total += c;
    }
    const std::size_t top = dominant(counts);
    return fmt::format("{} '{}': {} training issues, most often {} ({})", what, shown, total,
                       category_label(kAllCategories[top]), percent(counts[top], total));
}

}  // namespace

std::string assignee_narrative(const AssigneeProfile& profile) {
    const std::size_t top = dominant(profile.histogram);
    std::string tail;
    if (kAllCategories[top] == ResolutionCategory::MoreThanFiveDays) {
        tail = "a history of resolving long-duration issues";
    } else if (kAllCategories[top] == ResolutionCategory::LessThanHalfDay) {
        tail = "a history of resolving issues within half a day";
    } else {
        tail = fmt::format("most often resolved in {}", category_label(kAllCategories[top]));
    }
    return fmt::format("{}: {} resolved issues, mean {:.2f} days, median {:.2f} days; {} took more than 5 days, {}",
                       profile.name, profile.count, profile.mean_days, profile.median_days,
                       percent(profile.histogram[index_of(ResolutionCategory::MoreThanFiveDays)], profile.count),
                       tail);
}

Explanation explain(const StackedModel& model, const PredictionInput& input) {
    return explain(model, input, predict(model, input));
}

Explanation explain(const StackedModel& model, const PredictionInput& input, const Prediction& prediction) {
    Explanation e;
    e.prediction = prediction;
    e.agreement = agreement_flags(prediction);
    const RawIssue& issue = input.issue;
    const auto doc = document_vector(model, input);

    for (const auto v : kAllViews) {
        auto& ve = e.views[index_of(v)];
        const auto& probs = prediction.per_view[index_of(v)];
        const std::size_t top = learn::argmax(probs);
        ve.view = v;
        ve.top_category = kAllCategories[top];
        ve.probability = probs[top];
        ve.agrees = ve.top_category == prediction.predicted;
    }

    e.views[index_of(ViewKind::Priority)].narrative = categorical_narrative("priority", model.priority, issue.priority);
    e.views[index_of(ViewKind::IssueType)].narrative =
        categorical_narrative("issue type", model.issue_type, issue.issue_type);
    e.views[index_of(ViewKind::Component)].narrative =
        categorical_narrative("primary component", model.component, primary(issue.components));
    e.views[index_of(ViewKind::Label)].narrative =
        categorical_narrative("primary label", model.label, primary(issue.labels));

    if (const auto* profile = model.assignees.find(issue.assignee)) {
        e.assignee = *profile;
        e.views[index_of(ViewKind::Assignee)].narrative = assignee_narrative(*profile);
    } else {
        e.views[index_of(ViewKind::Assignee)].narrative =
            issue.assignee ? fmt::format("assignee '{}' has no training history", *issue.assignee)
                           : std::string("issue is unassigned; no assignee history");
    }

    const auto topic = topics::assign_topic(doc, model.topics);
    e.topic_id = topic.topic_id;
    const auto& kw = model.topics.keywords.size() > topic.topic_id ? model.topics.keywords[topic.topic_id]
                                                                   : std::vector<topics::TopicKeyword>{};
    e.topic_keywords.assign(kw.begin(), kw.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(5, kw.size())));
    {
        std::string words;
        for (const auto& k : e.topic_keywords) {
            words += words.empty() ? k.token : ", " + k.token;
        }
        e.views[index_of(ViewKind::Topics)].narrative =
            fmt::format("topic {} (distance {:.3f}): {}", topic.topic_id, topic.distance,
                        words.empty() ? std::string("no keywords") : words);
    }

    for (const auto& nb : model.similarity.neighbors(doc, 3)) {
        e.similar.push_back({model.similarity.keys[nb.row], nb.similarity,
                             kAllCategories[model.similarity.labels[nb.row]]});
    }
    if (e.similar.empty()) {
        e.views[index_of(ViewKind::Similarity)].narrative = "no textual overlap with any training issue";
    } else {
        std::string list;
        for (const auto& s : e.similar) {
            list += fmt::format("{}{} (similarity {:.3f}, {})", list.empty() ? "" : ", ", s.issue_key, s.similarity,
                                category_label(s.category));
        }
        e.views[index_of(ViewKind::Similarity)].narrative = "most similar resolved issues: " + list;
    }
    return e;
}

// ------------------------------------------------------------------ whatif

bool Overrides::empty() const noexcept { return !priority && !issue_type && !components && !labels && !assignee; }

void Overrides::apply(RawIssue& issue) const {
    if (priority) {
        issue.priority = *priority;
    }
    if (issue_type) {
        issue.issue_type = *issue_type;
    }
    if (components) {
        issue.components = *components;
    }
    if (labels) {
        issue.labels = *labels;
    }
    if (assignee) {
        issue.assignee = *assignee;
    }
}

Overrides overrides_from_json(const json& j) {
    Overrides o;
    if (j.is_null()) {
        return o;
    }
    if (!j.is_object()) {
        throw ValidationError("overrides must be a JSON object", {"overrides"});
    }
    std::vector<std::string> forbidden;
    std::vector<std::string> bad;
    for (const auto& [key, value] : j.items()) {
        if (key == "priority" || key == "issue_type") {
            if (!value.is_string()) {
                bad.push_back(key);
            } else {
                (key == "priority" ? o.priority : o.issue_type) = value.get<std::string>();
            }
        } else if (key == "components" || key == "labels") {
            if (!is_string_array(value)) {
                bad.push_back(key);
            } else {
                (key == "components" ? o.components : o.labels) = value.get<std::vector<std::string>>();
            }
        } else if (key == "assignee") {
            if (value.is_null()) {
                o.assignee = std::optional<std::string>{};
            } else if (value.is_string()) {
                o.assignee = std::optional<std::string>{value.get<std::string>()};
            } else {
                bad.push_back(key);
            }
        } else {
            forbidden.push_back(key);
        }
    }
    if (!forbidden.empty()) {
        throw OverrideError(std::move(forbidden));
    }
    if (!bad.empty()) {
        throw ValidationError("mistyped override values", std::move(bad));
    }
    return o;
}

WhatIfResult whatif(const StackedModel& model, const PredictionInput& input, const Overrides& overrides) {
    WhatIfResult w;
    w.baseline = predict(model, input);
    PredictionInput changed = input;
    overrides.apply(changed.issue);
    w.modified = predict(model, changed);
    for (std::size_t c = 0; c < kNumCategories; ++c) {
        w.delta[c] = w.modified.final_probs[c] - w.baseline.final_probs[c];
    }
    return w;
}

// ----------------------------------------------------------- serialization

namespace {

double rounded(double p, std::optional<int> decimals) {
    if (!decimals) {
        return p;
    }
    const double scale = std::pow(10.0, *decimals);
    const double r = std::round(p * scale) / scale;
    return r == 0.0 ? 0.0 : r;
}

json probs_json(const ClassProbs& probs, std::optional<int> decimals) {
    json out = json::object();
    for (const auto c : kAllCategories) {
        out[std::string(category_name(c))] = rounded(probs[index_of(c)], decimals);
    }
    return out;
}

json probs_histogram_json(const CategoryCounts& counts) {
    json out = json::object();
    for (const auto c : kAllCategories) {
        out[std::string(category_name(c))] = counts[index_of(c)];
    }
    return out;
}

}  // namespace

json prediction_to_json(const Prediction& p, std::optional<int> decimals) {
    json per_view = json::object();
    for (const auto v : kAllViews) {
        per_view[std::string(view_name(v))] = probs_json(p.per_view[index_of(v)], decimals);
    }
    return json{{"issue_key", p.issue_key},
                {"final_probs", probs_json(p.final_probs, decimals)},
                {"predicted", category_name(p.predicted)},
                {"per_view", per_view}};
}

json explanation_to_json(const Explanation& e, std::optional<int> decimals) {
    json views = json::array();
    for (const auto& v : e.views) {
        views.push_back({{"view", view_name(v.view)},
                         {"top_category", category_name(v.top_category)},
                         {"probability", rounded(v.probability, decimals)},
                         {"agrees", v.agrees},
                         {"narrative", v.narrative}});
    }
    json flags = json::array();
    for (const auto v : e.agreement) {
        flags.push_back(view_name(v));
    }
    json keywords = json::array();
    for (const auto& k : e.topic_keywords) {
        keywords.push_back(json::array({k.token, k.score}));
    }
    json similar = json::array();
    for (const auto& s : e.similar) {
        similar.push_back({{"issue_key", s.issue_key},
                           {"similarity", rounded(s.similarity, decimals)},
                           {"category", category_name(s.category)}});
    }
    json assignee = nullptr;
    if (e.assignee) {
        assignee = {{"name", e.assignee->name},
                    {"count", e.assignee->count},
                    {"mean_days", e.assignee->mean_days},
                    {"median_days", e.assignee->median_days},
                    {"histogram", probs_histogram_json(e.assignee->histogram)}};
    }
    return json{{"prediction", prediction_to_json(e.prediction, decimals)},
                {"views", views},
                {"agreement_flags", flags},
                {"assignee", assignee},
                {"topic", {{"id", e.topic_id}, {"keywords", keywords}}},
                {"similar", similar}};
}

json whatif_to_json(const WhatIfResult& w, std::optional<int> decimals) {
    return json{{"baseline", prediction_to_json(w.baseline, decimals)},
                {"modified", prediction_to_json(w.modified, decimals)},
                {"delta", probs_json(w.delta, decimals)}};
}

}  // namespace fixtime
