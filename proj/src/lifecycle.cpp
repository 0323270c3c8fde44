#include "fixtime/lifecycle.hpp"

#include "fixtime/strings.hpp"
#include "json_util.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fixtime {

using nlohmann::json;

std::string_view category_name(ResolutionCategory c) noexcept {
    switch (c) {
        case ResolutionCategory::LessThanHalfDay:
            return "LessThanHalfDay";
        case ResolutionCategory::HalfToTwoDays:
            return "HalfToTwoDays";
        case ResolutionCategory::TwoToFiveDays:
            return "TwoToFiveDays";
        case ResolutionCategory::MoreThanFiveDays:
            return "MoreThanFiveDays";
    }
    return "?";
}

std::string_view category_label(ResolutionCategory c) noexcept {
    switch (c) {
        case ResolutionCategory::LessThanHalfDay:
            return "< 0.5 days";
        case ResolutionCategory::HalfToTwoDays:
            return "0.5-2 days";
        case ResolutionCategory::TwoToFiveDays:
            return "2-5 days";
        case ResolutionCategory::MoreThanFiveDays:
            return "> 5 days";
    }
    return "?";
}

std::optional<ResolutionCategory> parse_category(std::string_view name) noexcept {
    for (const auto c : kAllCategories) {
        if (category_name(c) == name) {
            return c;
        }
    }
    return std::nullopt;
}

ResolutionCategory categorize(double during_work_days) {
    if (!std::isfinite(during_work_days) || during_work_days < 0.0) {
        throw std::domain_error("during-work time must be finite and non-negative");
    }
    if (during_work_days < 0.5) {
        return ResolutionCategory::LessThanHalfDay;
    }
    if (during_work_days < 2.0) {
        return ResolutionCategory::HalfToTwoDays;
    }
    if (during_work_days < 5.0) {
        return ResolutionCategory::TwoToFiveDays;
    }
    return ResolutionCategory::MoreThanFiveDays;
}

namespace {

bool contains_alias(const std::set<std::string>& aliases, std::string_view status) {
    const auto needle = normalize_value(status);
    for (const auto& a : aliases) {
        if (normalize_value(a) == needle) {
            return true;
        }
    }
    return false;
}

}  // namespace

void StatusMap::validate() const {
    if (in_progress.empty() || resolved.empty() || closed.empty()) {
        throw ConfigError("status_map: every alias set must be nonempty");
    }
    const std::array<const std::set<std::string>*, 3> sets{&in_progress, &resolved, &closed};
    for (std::size_t a = 0; a < sets.size(); ++a) {
        for (std::size_t b = a + 1; b < sets.size(); ++b) {
            for (const auto& s : *sets[a]) {
                if (contains_alias(*sets[b], s)) {
                    throw ConfigError("status_map: alias '" + s + "' appears in more than one set");
                }
            }
        }
    }
}

bool StatusMap::is_in_progress(std::string_view status) const { return contains_alias(in_progress, status); }
bool StatusMap::is_resolved(std::string_view status) const { return contains_alias(resolved, status); }
bool StatusMap::is_closed(std::string_view status) const { return contains_alias(closed, status); }

IntervalOutcome extract_intervals(const RawIssue& issue, const StatusMap& map, DuringWorkMode mode) {
    std::vector<const ChangelogEntry*> status;
    for (const auto& e : issue.changelog) {
        if (normalize_value(e.field) == "status") {
            status.push_back(&e);
        }
    }

    std::size_t start = status.size();
    for (std::size_t i = 0; i < status.size(); ++i) {
        if (map.is_in_progress(status[i]->to_value)) {
            start = i;
            break;
        }
    }
    if (start == status.size()) {
        return NoWorkSignal{"never_in_progress"};
    }

    std::size_t resolution = status.size();
    for (std::size_t i = start + 1; i < status.size(); ++i) {
        if (map.is_resolved(status[i]->to_value)) {
            resolution = i;
            if (mode == DuringWorkMode::Elapsed) {
                break;
            }
        }
    }
    if (resolution == status.size()) {
        return NoWorkSignal{"never_resolved"};
    }

    LifecycleIntervals out;
    out.before_work = elapsed_days(issue.created_at, status[start]->at);
    if (out.before_work < 0.0) {
        return InvalidIntervals{"negative_before_work"};
    }

    if (mode == DuringWorkMode::Elapsed) {
        out.during_work = elapsed_days(status[start]->at, status[resolution]->at);
        if (out.during_work < 0.0) {
            return InvalidIntervals{"negative_during_work"};
        }
    } else {
        double total = 0.0;
        for (std::size_t i = start; i < resolution; ++i) {
            if (!map.is_in_progress(status[i]->to_value)) {
                continue;
            }
            const double episode = elapsed_days(status[i]->at, status[i + 1]->at);
            if (episode < 0.0) {
                return InvalidIntervals{"negative_during_work"};
            }
            total += episode;
        }
        out.during_work = total;
    }

    for (std::size_t i = resolution + 1; i < status.size(); ++i) {
        if (map.is_closed(status[i]->to_value)) {
            const double after = elapsed_days(status[resolution]->at, status[i]->at);
            if (after < 0.0) {
                return InvalidIntervals{"negative_after_work"};
            }
            out.after_work = after;
            break;
        }
    }
    return out;
}

LabelResult label_corpus(std::vector<RawIssue> issues, const StatusMap& map, DuringWorkMode mode) {
    map.validate();
    LabelResult result;
    if (!issues.empty()) {
        result.corpus.project = issues.front().project;
    }
    for (auto& issue : issues) {
        if (issue.project != result.corpus.project) {
            throw Error("label_corpus: issues from multiple projects ('" + result.corpus.project + "', '" +
                        issue.project + "')");
        }
        auto outcome = extract_intervals(issue, map, mode);
        if (const auto* no_work = std::get_if<NoWorkSignal>(&outcome)) {
            ++result.report.excluded["no_work"];
            result.report.details.emplace_back(issue.key, no_work->reason);
            continue;
        }
        if (const auto* invalid = std::get_if<InvalidIntervals>(&outcome)) {
            ++result.report.excluded["invalid"];
            result.report.details.emplace_back(issue.key, invalid->reason);
            continue;
        }
        const auto& intervals = std::get<LifecycleIntervals>(outcome);
        result.corpus.issues.push_back(LabeledIssue{std::move(issue), intervals, categorize(intervals.during_work)});
    }
    if (result.corpus.issues.empty()) {
        throw CorpusEmptyError(std::move(result.report));
    }
    return result;
}

void to_json(json& j, const StatusMap& map) {
    j = json{{"in_progress", map.in_progress}, {"resolved", map.resolved}, {"closed", map.closed}};
}

void from_json(const json& j, StatusMap& map) {
    detail::check_keys(j, {"in_progress", "resolved", "closed"}, "status_map");
    detail::read_optional(j, "in_progress", map.in_progress);
    detail::read_optional(j, "resolved", map.resolved);
    detail::read_optional(j, "closed", map.closed);
    map.validate();
}

json corpus_to_json(const ProjectCorpus& corpus) {
    json issues = json::array();
    for (const auto& li : corpus.issues) {
        json j = issue_to_json(li.issue);
        j["intervals"] = {{"before_work", li.intervals.before_work},
                          {"during_work", li.intervals.during_work},
                          {"after_work", li.intervals.after_work ? json(*li.intervals.after_work) : json(nullptr)}};
        j["category"] = category_name(li.category);
        issues.push_back(std::move(j));
    }
    return json{{"format", "fixtime.corpus"},
                {"version", 1},
                {"project", corpus.project},
                {"provenance", {{"dump_path", corpus.provenance.dump_path}, {"filter", corpus.provenance.filter}}},
                {"issues", std::move(issues)}};
}

ProjectCorpus corpus_from_json(const json& j) {
    if (j.value("format", "") != "fixtime.corpus") {
        throw FormatError("not a fixtime corpus document");
    }
    if (j.value("version", 0) != 1) {
        throw FormatError("unsupported corpus version");
    }
    ProjectCorpus corpus;
    corpus.project = j.at("project").get<std::string>();
    const auto& prov = j.at("provenance");
    corpus.provenance.dump_path = prov.value("dump_path", "");
    if (prov.contains("filter")) {
        corpus.provenance.filter = prov.at("filter").get<FilterConfig>();
    }
    for (const auto& ij : j.at("issues")) {
        LabeledIssue li;
        li.issue = issue_from_json(ij);
        const auto& iv = ij.at("intervals");
        li.intervals.before_work = iv.at("before_work").get<double>();
        li.intervals.during_work = iv.at("during_work").get<double>();
        if (!iv.at("after_work").is_null()) {
            li.intervals.after_work = iv.at("after_work").get<double>();
        }
        const auto cat = parse_category(ij.at("category").get<std::string>());
        if (!cat) {
            throw FormatError("unknown category in corpus");
        }
        li.category = *cat;
        corpus.issues.push_back(std::move(li));
    }
    return corpus;
}

void save_corpus(const ProjectCorpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write corpus '" + path.string() + "'");
    }
    out << corpus_to_json(corpus).dump() << '\n';
}

ProjectCorpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open corpus '" + path.string() + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("corpus '" + path.string() + "' is not valid JSON");
    }
    return corpus_from_json(j);
}

}  // namespace fixtime
