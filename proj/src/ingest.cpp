#include "fixtime/ingest.hpp"

#include "fixtime/error.hpp"
#include "fixtime/strings.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <unordered_map>

namespace fixtime {

namespace {

using nlohmann::json;

std::string required_string(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        throw FormatError(std::string("missing required field '") + key + "'");
    }
    if (!it->is_string()) {
        throw FormatError(std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

std::string optional_string(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return {};
    }
    if (!it->is_string()) {
        throw FormatError(std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

std::optional<std::string> nullable_string(const json& j, const char* key) {
    auto s = optional_string(j, key);
    if (s.empty()) {
        return std::nullopt;
    }
    return s;
}

std::vector<std::string> string_list(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return {};
    }
    if (!it->is_array()) {
        throw FormatError(std::string("field '") + key + "' must be an array of strings");
    }
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) {
            throw FormatError(std::string("field '") + key + "' must be an array of strings");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

Timestamp timestamp_field(const json& j, const char* key, const std::string& context) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        throw FormatError("missing required field '" + context + "'");
    }
    if (!it->is_string()) {
        throw FormatError("field '" + context + "' must be an ISO-8601 string");
    }
    const auto t = parse_timestamp(it->get<std::string>());
    if (!t) {
        throw FormatError("field '" + context + "' is not a valid ISO-8601 timestamp");
    }
    return *t;
}

}  // namespace

void FilterConfig::validate() const {
    if (min_issues_per_assignee < 1) {
        throw ConfigError("filter.min_issues_per_assignee must be >= 1");
    }
}

RawIssue issue_from_json(const json& j) {
    if (!j.is_object()) {
        throw FormatError("record is not a JSON object");
    }
    RawIssue issue;
    issue.key = required_string(j, "key");
    if (issue.key.empty()) {
        throw FormatError("missing required field 'key'");
    }
    issue.project = required_string(j, "project");
    issue.created_at = timestamp_field(j, "created_at", "created_at");
    issue.summary = optional_string(j, "summary");
    issue.description = optional_string(j, "description");
    issue.priority = optional_string(j, "priority");
    issue.issue_type = optional_string(j, "issue_type");
    issue.status = optional_string(j, "status");
    issue.resolution = nullable_string(j, "resolution");
    issue.assignee = nullable_string(j, "assignee");
    issue.components = string_list(j, "components");
    issue.labels = string_list(j, "labels");

    if (const auto it = j.find("changelog"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) {
            throw FormatError("field 'changelog' must be an array");
        }
        std::size_t i = 0;
        for (const auto& e : *it) {
            const std::string ctx = "changelog[" + std::to_string(i++) + "]";
            if (!e.is_object()) {
                throw FormatError("field '" + ctx + "' must be an object");
            }
            ChangelogEntry entry;
            entry.at = timestamp_field(e, "at", ctx + ".at");
            entry.field = optional_string(e, "field");
            entry.from_value = optional_string(e, "from");
            entry.to_value = optional_string(e, "to");
            // A status "transition" to the same status carries no information.
            if (normalize_value(entry.field) == "status" &&
                normalize_value(entry.from_value) == normalize_value(entry.to_value)) {
                continue;
            }
            issue.changelog.push_back(std::move(entry));
        }
        std::stable_sort(issue.changelog.begin(), issue.changelog.end(),
                         [](const ChangelogEntry& a, const ChangelogEntry& b) { return a.at < b.at; });
        if (!issue.changelog.empty() && issue.changelog.front().at < issue.created_at) {
            throw FormatError("changelog entry precedes created_at");
        }
    }
    return issue;
}

json issue_to_json(const RawIssue& issue) {
    json changelog = json::array();
    for (const auto& e : issue.changelog) {
        changelog.push_back(
            {{"at", format_timestamp(e.at)}, {"field", e.field}, {"from", e.from_value}, {"to", e.to_value}});
    }
    return json{{"key", issue.key},
                {"project", issue.project},
                {"summary", issue.summary},
                {"description", issue.description},
                {"priority", issue.priority},
                {"issue_type", issue.issue_type},
                {"status", issue.status},
                {"resolution", issue.resolution ? json(*issue.resolution) : json(nullptr)},
                {"assignee", issue.assignee ? json(*issue.assignee) : json(nullptr)},
                {"components", issue.components},
                {"labels", issue.labels},
                {"created_at", format_timestamp(issue.created_at)},
                {"changelog", changelog}};
}

ParseResult parse_issue_stream(std::istream& in, ParseMode mode) {
    ParseResult result;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            if (mode == ParseMode::Abort) {
                throw ParseError(line_no, "malformed JSON");
            }
            result.malformed.push_back({line_no, "malformed JSON"});
            continue;
        }
        if (!j.is_object()) {
            if (mode == ParseMode::Abort) {
                throw ParseError(line_no, "record is not a JSON object");
            }
            result.malformed.push_back({line_no, "record is not a JSON object"});
            continue;
        }
        try {
            RawIssue issue = issue_from_json(j);
            if (!seen.insert(issue.key).second) {
                result.rejected.push_back({line_no, "duplicate key '" + issue.key + "'"});
                continue;
            }
            result.issues.push_back(std::move(issue));
        } catch (const FormatError& e) {
            result.rejected.push_back({line_no, e.what()});
        }
    }
    return result;
}

ParseResult parse_issue_dump(const std::filesystem::path& path, ParseMode mode) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open issue dump '" + path.string() + "'");
    }
    return parse_issue_stream(in, mode);
}

std::size_t FilterReport::total() const {
    std::size_t n = 0;
    for (const auto& [reason, count] : rejected) {
        n += count;
    }
    return n;
}

FilterResult filter_issues(std::span<const RawIssue> issues, const FilterConfig& cfg) {
    cfg.validate();
    FilterResult result;
    std::vector<const RawIssue*> survivors;
    survivors.reserve(issues.size());
    for (const auto& issue : issues) {
        const char* reason = nullptr;
        if (cfg.require_resolved && !issue.resolution) {
            reason = reject_reason::unresolved;
        } else if (cfg.require_assignee && !issue.assignee) {
            reason = reject_reason::unassigned;
        } else if (cfg.require_component && issue.components.empty()) {
            reason = reject_reason::missing_component;
        } else if (cfg.require_label && issue.labels.empty()) {
            reason = reject_reason::missing_label;
        }
        if (reason != nullptr) {
            ++result.report.rejected[reason];
        } else {
            survivors.push_back(&issue);
        }
    }

    // Unassigned survivors (require_assignee off) share the empty-name bucket.
    std::unordered_map<std::string, std::size_t> per_assignee;
    for (const auto* issue : survivors) {
        ++per_assignee[issue->assignee.value_or("")];
    }
    for (const auto* issue : survivors) {
        if (per_assignee[issue->assignee.value_or("")] < cfg.min_issues_per_assignee) {
            ++result.report.rejected[reject_reason::assignee_below_threshold];
        } else {
            result.kept.push_back(*issue);
        }
    }
    return result;
}

void to_json(json& j, const FilterConfig& cfg) {
    j = json{{"min_issues_per_assignee", cfg.min_issues_per_assignee},
             {"require_component", cfg.require_component},
             {"require_label", cfg.require_label},
             {"require_resolved", cfg.require_resolved},
             {"require_assignee", cfg.require_assignee}};
}

void from_json(const json& j, FilterConfig& cfg) {
    detail::check_keys(j,
                       {"min_issues_per_assignee", "require_component", "require_label", "require_resolved",
                        "require_assignee"},
                       "filter");
    detail::read_optional(j, "min_issues_per_assignee", cfg.min_issues_per_assignee);
    detail::read_optional(j, "require_component", cfg.require_component);
    detail::read_optional(j, "require_label", cfg.require_label);
    detail::read_optional(j, "require_resolved", cfg.require_resolved);
    detail::read_optional(j, "require_assignee", cfg.require_assignee);
}

}  // namespace fixtime
