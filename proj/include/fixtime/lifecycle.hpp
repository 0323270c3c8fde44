#pragma once

#include "fixtime/error.hpp"
#include "fixtime/ingest.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fixtime {

/// The four during-work buckets, ordered from shortest to longest.
enum class ResolutionCategory : std::uint8_t { LessThanHalfDay = 0, HalfToTwoDays = 1, TwoToFiveDays = 2, MoreThanFiveDays = 3 };

inline constexpr std::size_t kNumCategories = 4;

inline constexpr std::array<ResolutionCategory, kNumCategories> kAllCategories{
    ResolutionCategory::LessThanHalfDay, ResolutionCategory::HalfToTwoDays, ResolutionCategory::TwoToFiveDays,
    ResolutionCategory::MoreThanFiveDays};

[[nodiscard]] constexpr std::size_t index_of(ResolutionCategory c) noexcept { return static_cast<std::size_t>(c); }

/// Identifier used in files and on the wire, e.g. "MoreThanFiveDays".
[[nodiscard]] std::string_view category_name(ResolutionCategory c) noexcept;
/// Human-readable bucket, e.g. "> 5 days".
[[nodiscard]] std::string_view category_label(ResolutionCategory c) noexcept;
[[nodiscard]] std::optional<ResolutionCategory> parse_category(std::string_view name) noexcept;

/// Half-open, lower-inclusive buckets: [0,0.5) [0.5,2) [2,5) [5,inf).
/// Throws std::domain_error on negative or non-finite input.
[[nodiscard]] ResolutionCategory categorize(double during_work_days);

/// Workflow status names; matched case-insensitively after trimming.
struct StatusMap {
    std::set<std::string> in_progress{"In Progress"};
    std::set<std::string> resolved{"Resolved"};
    std::set<std::string> closed{"Closed"};

    /// Throws ConfigError unless every set is nonempty and the sets are disjoint.
    void validate() const;

    [[nodiscard]] bool is_in_progress(std::string_view status) const;
    [[nodiscard]] bool is_resolved(std::string_view status) const;
    [[nodiscard]] bool is_closed(std::string_view status) const;
};

enum class DuringWorkMode {
    /// First entry into in-progress until the first later entry into resolved.
    Elapsed,
    /// Sum of every in-progress episode that ends by the last resolution.
    AccumulatedActive,
};

struct LifecycleIntervals {
    double before_work = 0.0;
    double during_work = 0.0;
    std::optional<double> after_work;
};

struct NoWorkSignal {
    std::string reason;  // "never_in_progress" | "never_resolved"
};

struct InvalidIntervals {
    std::string reason;  // names the negative interval
};

using IntervalOutcome = std::variant<LifecycleIntervals, NoWorkSignal, InvalidIntervals>;

/// Only changelog entries whose field is "status" are consulted.
[[nodiscard]] IntervalOutcome extract_intervals(const RawIssue& issue, const StatusMap& map,
                                                DuringWorkMode mode = DuringWorkMode::Elapsed);

struct LabeledIssue {
    RawIssue issue;
    LifecycleIntervals intervals;
    ResolutionCategory category{};
};

struct Provenance {
    std::string dump_path;
    FilterConfig filter;
};

struct ProjectCorpus {
    std::string project;
    std::vector<LabeledIssue> issues;
    Provenance provenance;

    [[nodiscard]] std::size_t size() const noexcept { return issues.size(); }
};

struct LabelReport {
    /// "no_work" and "invalid" counts.
    std::map<std::string, std::size_t> excluded;
    /// (issue key, detailed reason) per excluded issue.
    std::vector<std::pair<std::string, std::string>> details;
};

class CorpusEmptyError : public CorpusEmpty {
  public:
    explicit CorpusEmptyError(LabelReport report)
        : CorpusEmpty("no issue carries a usable during-work interval"), report_(std::move(report)) {}
    [[nodiscard]] const LabelReport& report() const noexcept { return report_; }

  private:
    LabelReport report_;
};

struct LabelResult {
    ProjectCorpus corpus;
    LabelReport report;
};

/// Attaches intervals and categories; throws CorpusEmptyError when nothing survives.
[[nodiscard]] LabelResult label_corpus(std::vector<RawIssue> issues, const StatusMap& map,
                                       DuringWorkMode mode = DuringWorkMode::Elapsed);

void to_json(nlohmann::json& j, const StatusMap& map);
void from_json(const nlohmann::json& j, StatusMap& map);

[[nodiscard]] nlohmann::json corpus_to_json(const ProjectCorpus& corpus);
[[nodiscard]] ProjectCorpus corpus_from_json(const nlohmann::json& j);
void save_corpus(const ProjectCorpus& corpus, const std::filesystem::path& path);
[[nodiscard]] ProjectCorpus load_corpus(const std::filesystem::path& path);

}  // namespace fixtime
