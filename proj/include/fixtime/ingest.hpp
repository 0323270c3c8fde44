#pragma once

#include "fixtime/time.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fixtime {

struct ChangelogEntry {
    Timestamp at;
    std::string field;
    std::string from_value;
    std::string to_value;
};

/// One tracker issue as read from a dump. The changelog is sorted by `at`.
struct RawIssue {
    std::string key;
    std::string project;
    std::string summary;
    std::string description;
    std::string priority;
    std::string issue_type;
    std::string status;
    std::optional<std::string> resolution;
    std::optional<std::string> assignee;
    std::vector<std::string> components;
    std::vector<std::string> labels;
    Timestamp created_at{};
    std::vector<ChangelogEntry> changelog;
};

struct FilterConfig {
    std::size_t min_issues_per_assignee = 20;
    bool require_component = true;
    bool require_label = true;
    bool require_resolved = true;
    bool require_assignee = true;

    void validate() const;
};

enum class ParseMode { Abort, Skip };

struct LineIssue {
    std::size_t line;
    std::string reason;
};

struct ParseResult {
    std::vector<RawIssue> issues;
    /// Lines that were not valid JSON objects (skip mode only).
    std::vector<LineIssue> malformed;
    /// Well-formed records rejected for a missing or invalid field.
    std::vector<LineIssue> rejected;
};

/// Decodes one JSONL record. Throws FormatError naming the offending field.
[[nodiscard]] RawIssue issue_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json issue_to_json(const RawIssue& issue);

/// Reads a JSONL dump. In abort mode a malformed line throws ParseError.
[[nodiscard]] ParseResult parse_issue_stream(std::istream& in, ParseMode mode = ParseMode::Skip);
[[nodiscard]] ParseResult parse_issue_dump(const std::filesystem::path& path, ParseMode mode = ParseMode::Skip);

struct FilterReport {
    /// Rejection counts keyed by reason; each rejected issue is counted once.
    std::map<std::string, std::size_t> rejected;

    [[nodiscard]] std::size_t total() const;
};

struct FilterResult {
    std::vector<RawIssue> kept;
    FilterReport report;
};

namespace reject_reason {
inline constexpr const char* unresolved = "unresolved";
inline constexpr const char* unassigned = "unassigned";
inline constexpr const char* missing_component = "missing_component";
inline constexpr const char* missing_label = "missing_label";
inline constexpr const char* assignee_below_threshold = "assignee_below_threshold";
}  // namespace reject_reason

/// Field-presence filters first, then the per-assignee count on the survivors.
[[nodiscard]] FilterResult filter_issues(std::span<const RawIssue> issues, const FilterConfig& cfg);

void to_json(nlohmann::json& j, const FilterConfig& cfg);
void from_json(const nlohmann::json& j, FilterConfig& cfg);

}  // namespace fixtime
