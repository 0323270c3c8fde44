#pragma once

#include "fixtime/lifecycle.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fixtime {

enum class ViewKind : std::uint8_t { Priority, IssueType, Component, Label, Assignee, Topics, Similarity };

inline constexpr std::size_t kNumViews = 7;
inline constexpr std::array<ViewKind, kNumViews> kAllViews{ViewKind::Priority,  ViewKind::IssueType,
                                                           ViewKind::Component, ViewKind::Label,
                                                           ViewKind::Assignee,  ViewKind::Topics,
                                                           ViewKind::Similarity};

[[nodiscard]] constexpr std::size_t index_of(ViewKind v) noexcept { return static_cast<std::size_t>(v); }
/// "priority", "issue_type", "component", "label", "assignee", "topics", "similarity".
[[nodiscard]] std::string_view view_name(ViewKind v) noexcept;
[[nodiscard]] std::optional<ViewKind> parse_view(std::string_view name) noexcept;

using CategoryCounts = std::array<std::size_t, kNumCategories>;

/// First listed entry, or "" when the list is empty.
[[nodiscard]] std::string primary(const std::vector<std::string>& values);

/// One-hot encoding of a trimmed, lowercased categorical value. Values not
/// seen during fitting encode as all zeros.
struct CategoricalEncoder {
    std::vector<std::string> values;      // sorted, normalized
    std::vector<CategoryCounts> counts;   // training category counts per value

    [[nodiscard]] static CategoricalEncoder fit(std::span<const std::string> raw_values,
                                                std::span<const std::size_t> labels);
    [[nodiscard]] std::size_t dim() const noexcept { return values.size(); }
    [[nodiscard]] std::optional<std::size_t> find(std::string_view raw) const;
    [[nodiscard]] std::vector<double> encode(std::string_view raw) const;
};

/// Resolution history of one assignee over the training rows.
struct AssigneeProfile {
    std::string name;  // as first seen
    std::size_t count = 0;
    double mean_days = 0.0;
    double median_days = 0.0;
    CategoryCounts histogram{};
    std::map<std::string, std::size_t> components;  // normalized primary component -> count
};

struct AssigneeProfiles {
    std::map<std::string, AssigneeProfile> by_assignee;  // keyed by normalized name

    struct Row {
        std::optional<std::string> assignee;
        std::string primary_component;
        double during_work = 0.0;
        std::size_t label = 0;
    };
    [[nodiscard]] static AssigneeProfiles fit(std::span<const Row> rows);

    [[nodiscard]] const AssigneeProfile* find(const std::optional<std::string>& assignee) const;

    static constexpr std::size_t kDim = 8;
    /// [count, mean, median, 4 category proportions, component-match flag];
    /// all zeros for an unknown or absent assignee.
    [[nodiscard]] std::vector<double> features(const std::optional<std::string>& assignee,
                                               std::string_view primary_component) const;
    /// features() for the rows the profiles were fitted on. The statistics
    /// are the full profile, identical to prediction time; only the
    /// component flag ignores the row itself.
    [[nodiscard]] Eigen::MatrixXd training_features(std::span<const Row> rows) const;
};

/// Nearest-neighbour lookup over L2-normalized document vectors of the
/// training rows, stored in issue-key order.
struct SimilarityIndex {
    std::vector<std::string> keys;
    Eigen::MatrixXd vectors;  // n x d, unit or zero rows
    std::vector<std::size_t> labels;
    std::size_t k = 15;

    struct Neighbor {
        std::size_t row = 0;
        double similarity = 0.0;
    };

    [[nodiscard]] static SimilarityIndex build(std::vector<std::string> keys, const Eigen::MatrixXd& vectors,
                                               std::vector<std::size_t> labels, std::size_t k);
    [[nodiscard]] std::size_t size() const noexcept { return keys.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(vectors.cols()); }

    /// Top `k` rows by cosine similarity, ties to the earlier key; the row
    /// whose key equals `exclude` is skipped.
    [[nodiscard]] std::vector<Neighbor> neighbors(std::span<const double> query, std::size_t k,
                                                  std::string_view exclude = {}) const;

    static constexpr std::size_t kDim = kNumCategories + 2;
    /// [similarity-weighted category histogram (4), max similarity, mean
    /// similarity] over the top-k neighbours. A zero query or an empty
    /// neighbourhood yields (0.25 x 4, 0, 0).
    [[nodiscard]] std::vector<double> features(std::span<const double> query, std::string_view exclude = {}) const;
    [[nodiscard]] static std::vector<double> features_from(std::span<const Neighbor> neighbors,
                                                           std::span<const std::size_t> labels);
    /// features() for every row of `queries`, excluding `keys[i]` from row i
    /// when `exclude_keys` is given.
    [[nodiscard]] Eigen::MatrixXd features_batch(const Eigen::MatrixXd& queries,
                                                 std::span<const std::string> exclude_keys = {}) const;
};

void to_json(nlohmann::json& j, const CategoricalEncoder& e);
void from_json(const nlohmann::json& j, CategoricalEncoder& e);
void to_json(nlohmann::json& j, const AssigneeProfile& p);
void from_json(const nlohmann::json& j, AssigneeProfile& p);
void to_json(nlohmann::json& j, const AssigneeProfiles& p);
void from_json(const nlohmann::json& j, AssigneeProfiles& p);
void to_json(nlohmann::json& j, const SimilarityIndex& s);
void from_json(const nlohmann::json& j, SimilarityIndex& s);

}  // namespace fixtime
