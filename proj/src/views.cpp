#include "fixtime/views.hpp"

#include "fixtime/strings.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <numeric>

namespace fixtime {

namespace {

constexpr std::array<std::string_view, kNumViews> kViewNames{
    "priority", "issue_type", "component", "label", "assignee", "topics", "similarity"};

double median_of(std::vector<double> values) {
    if (values.empty()) {
        return 0.0;
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace

std::string_view view_name(ViewKind v) noexcept { return kViewNames[index_of(v)]; }

std::optional<ViewKind> parse_view(std::string_view name) noexcept {
    for (const auto v : kAllViews) {
        if (view_name(v) == name) {
            return v;
        }
    }
    return std::nullopt;
}

std::string primary(const std::vector<std::string>& values) { return values.empty() ? std::string{} : values.front(); }

// -------------------------------------------------------------- categorical

CategoricalEncoder CategoricalEncoder::fit(std::span<const std::string> raw_values,
                                           std::span<const std::size_t> labels) {
    if (raw_values.size() != labels.size()) {
        throw Error("encoder: one label per value required");
    }
    std::map<std::string, CategoryCounts> tally;
    for (std::size_t i = 0; i < raw_values.size(); ++i) {
        auto& counts = tally[normalize_value(raw_values[i])];
        ++counts.at(labels[i]);
    }
    CategoricalEncoder enc;
    for (auto& [value, counts] : tally) {
        enc.values.push_back(value);
        enc.counts.push_back(counts);
    }
    return enc;
}

std::optional<std::size_t> CategoricalEncoder::find(std::string_view raw) const {
    const std::string key = normalize_value(raw);
    const auto it = std::lower_bound(values.begin(), values.end(), key);
    if (it == values.end() || *it != key) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - values.begin());
}

std::vector<double> CategoricalEncoder::encode(std::string_view raw) const {
    std::vector<double> row(values.size(), 0.0);
    if (const auto idx = find(raw)) {
        row[*idx] = 1.0;
    }
    return row;
}

// ----------------------------------------------------------------- assignee

AssigneeProfiles AssigneeProfiles::fit(std::span<const Row> rows) {
    std::map<std::string, std::vector<double>> durations;
    AssigneeProfiles out;
    for (const auto& row : rows) {
        if (!row.assignee) {
            continue;
        }
        const std::string key = normalize_value(*row.assignee);
        auto& profile = out.by_assignee[key];
        if (profile.count == 0) {
            profile.name = std::string(trim(*row.assignee));
        }
        ++profile.count;
        ++profile.histogram.at(row.label);
        ++profile.components[normalize_value(row.primary_component)];
        durations[key].push_back(row.during_work);
    }
    for (auto& [key, profile] : out.by_assignee) {
        const auto& d = durations[key];
        profile.mean_days = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
        profile.median_days = median_of(d);
    }
    return out;
}

const AssigneeProfile* AssigneeProfiles::find(const std::optional<std::string>& assignee) const {
    if (!assignee) {
        return nullptr;
    }
    const auto it = by_assignee.find(normalize_value(*assignee));
    return it == by_assignee.end() ? nullptr : &it->second;
}

std::vector<double> AssigneeProfiles::features(const std::optional<std::string>& assignee,
                                               std::string_view primary_component) const {
    std::vector<double> out(kDim, 0.0);
    const AssigneeProfile* p = find(assignee);
    if (p == nullptr || p->count == 0) {
        return out;
    }
    const auto n = static_cast<double>(p->count);
    out[0] = n;
    out[1] = p->mean_days;
    out[2] = p->median_days;
    for (std::size_t c = 0; c < kNumCategories; ++c) {
        out[3 + c] = static_cast<double>(p->histogram[c]) / n;
    }
    const auto it = p->components.find(normalize_value(primary_component));
    out[7] = it != p->components.end() && it->second > 0 ? 1.0 : 0.0;
    return out;
}

Eigen::MatrixXd AssigneeProfiles::training_features(std::span<const Row> rows) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), kDim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto f = features(rows[i].assignee, rows[i].primary_component);
        if (const auto* p = find(rows[i].assignee)) {
            const auto it = p->components.find(normalize_value(rows[i].primary_component));
            f[7] = it != p->components.end() && it->second > 1 ? 1.0 : 0.0;
        }
        for (std::size_t c = 0; c < kDim; ++c) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = f[c];
        }
    }
    return out;
}

// --------------------------------------------------------------- similarity

SimilarityIndex SimilarityIndex::build(std::vector<std::string> keys, const Eigen::MatrixXd& vectors,
                                       std::vector<std::size_t> labels, std::size_t k) {
    if (keys.size() != static_cast<std::size_t>(vectors.rows()) || keys.size() != labels.size()) {
        throw Error("similarity index: keys, vectors and labels must align");
    }
    if (keys.empty()) {
        throw Error("similarity index: no training rows");
    }
    if (k < 1) {
        throw ConfigError("similarity: k must be >= 1");
    }
    std::vector<std::size_t> order(keys.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    SimilarityIndex idx;
    idx.k = k;
    idx.vectors.resize(vectors.rows(), vectors.cols());
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto src = static_cast<Eigen::Index>(order[r]);
        const double n = vectors.row(src).norm();
        idx.vectors.row(static_cast<Eigen::Index>(r)) = n > 0.0 ? Eigen::RowVectorXd(vectors.row(src) / n)
                                                                : Eigen::RowVectorXd::Zero(vectors.cols());
        idx.keys.push_back(std::move(keys[order[r]]));
        idx.labels.push_back(labels[order[r]]);
    }
    return idx;
}

namespace {

std::vector<SimilarityIndex::Neighbor> top_k(const Eigen::VectorXd& sims, std::size_t k,
                                             std::span<const std::string> keys, std::string_view exclude) {
    std::vector<SimilarityIndex::Neighbor> all;
    all.reserve(static_cast<std::size_t>(sims.size()));
    for (Eigen::Index r = 0; r < sims.size(); ++r) {
        if (!exclude.empty() && keys[static_cast<std::size_t>(r)] == exclude) {
            continue;
        }
        all.push_back({static_cast<std::size_t>(r), sims(r)});
    }
    const auto better = [](const SimilarityIndex::Neighbor& a, const SimilarityIndex::Neighbor& b) {
        return a.similarity > b.similarity || (a.similarity == b.similarity && a.row < b.row);
    };
    const std::size_t take = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), better);
    all.resize(take);
    return all;
}

}  // namespace

std::vector<SimilarityIndex::Neighbor> SimilarityIndex::neighbors(std::span<const double> query, std::size_t k,
                                                                  std::string_view exclude) const {
    if (query.size() != dim()) {
        throw DimensionError("similarity: expected a " + std::to_string(dim()) + "-dimensional query, got " +
                             std::to_string(query.size()));
    }
    const Eigen::Map<const Eigen::VectorXd> q(query.data(), static_cast<Eigen::Index>(query.size()));
    const double n = q.norm();
    if (n == 0.0) {
        return {};
    }
    const Eigen::VectorXd sims = vectors * (q / n);
    return top_k(sims, k, keys, exclude);
}

std::vector<double> SimilarityIndex::features_from(std::span<const Neighbor> neighbors,
                                                   std::span<const std::size_t> labels) {
    std::vector<double> out(kDim, 0.0);
    if (neighbors.empty()) {
        std::fill(out.begin(), out.begin() + kNumCategories, 1.0 / static_cast<double>(kNumCategories));
        return out;
    }
    double total = 0.0;
    double max_sim = neighbors.front().similarity;
    double sum_sim = 0.0;
    for (const auto& nb : neighbors) {
        const double w = std::max(nb.similarity, 0.0);
        out[labels[nb.row]] += w;
        total += w;
        max_sim = std::max(max_sim, nb.similarity);
        sum_sim += nb.similarity;
    }
    for (std::size_t c = 0; c < kNumCategories; ++c) {
        out[c] = total > 0.0 ? out[c] / total : 1.0 / static_cast<double>(kNumCategories);
    }
    out[kNumCategories] = max_sim;
    out[kNumCategories + 1] = sum_sim / static_cast<double>(neighbors.size());
    return out;
}

std::vector<double> SimilarityIndex::features(std::span<const double> query, std::string_view exclude) const {
    const auto nb = neighbors(query, k, exclude);
    return features_from(nb, labels);
}

Eigen::MatrixXd SimilarityIndex::features_batch(const Eigen::MatrixXd& queries,
                                                std::span<const std::string> exclude_keys) const {
    if (static_cast<std::size_t>(queries.cols()) != dim()) {
        throw DimensionError("similarity: query width mismatch");
    }
    if (!exclude_keys.empty() && exclude_keys.size() != static_cast<std::size_t>(queries.rows())) {
        throw Error("similarity: one exclusion key per query row required");
    }
    Eigen::MatrixXd normalized = queries;
    std::vector<bool> zero(static_cast<std::size_t>(queries.rows()), false);
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
        const double n = queries.row(i).norm();
        if (n > 0.0) {
            normalized.row(i) /= n;
        } else {
            zero[static_cast<std::size_t>(i)] = true;
        }
    }
    const Eigen::MatrixXd sims = normalized * vectors.transpose();
    Eigen::MatrixXd out(queries.rows(), static_cast<Eigen::Index>(kDim));
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
        std::vector<Neighbor> nb;
        if (!zero[static_cast<std::size_t>(i)]) {
            const std::string_view ex =
                exclude_keys.empty() ? std::string_view{} : std::string_view(exclude_keys[static_cast<std::size_t>(i)]);
            nb = top_k(sims.row(i).transpose(), k, keys, ex);
        }
        const auto f = features_from(nb, labels);
        for (std::size_t c = 0; c < kDim; ++c) {
            out(i, static_cast<Eigen::Index>(c)) = f[c];
        }
    }
    return out;
}

// ------------------------------------------------------------ serialization

void to_json(nlohmann::json& j, const CategoricalEncoder& e) {
    j = nlohmann::json{{"values", e.values}, {"counts", e.counts}};
}

void from_json(const nlohmann::json& j, CategoricalEncoder& e) {
    e.values = j.at("values").get<std::vector<std::string>>();
    e.counts = j.at("counts").get<std::vector<CategoryCounts>>();
    if (e.values.size() != e.counts.size() || !std::is_sorted(e.values.begin(), e.values.end())) {
        throw FormatError("encoder: values must be sorted and match counts");
    }
}

void to_json(nlohmann::json& j, const AssigneeProfile& p) {
    j = nlohmann::json{{"name", p.name},
                       {"count", p.count},
                       {"mean_days", p.mean_days},
                       {"median_days", p.median_days},
                       {"histogram", p.histogram},
                       {"components", p.components}};
}

void from_json(const nlohmann::json& j, AssigneeProfile& p) {
    p.name = j.at("name").get<std::string>();
    p.count = j.at("count").get<std::size_t>();
    p.mean_days = j.at("mean_days").get<double>();
    p.median_days = j.at("median_days").get<double>();
    p.histogram = j.at("histogram").get<CategoryCounts>();
    p.components = j.at("components").get<std::map<std::string, std::size_t>>();
}

void to_json(nlohmann::json& j, const AssigneeProfiles& p) { j = p.by_assignee; }

void from_json(const nlohmann::json& j, AssigneeProfiles& p) {
    p.by_assignee = j.get<std::map<std::string, AssigneeProfile>>();
}

void to_json(nlohmann::json& j, const SimilarityIndex& s) {
    j = nlohmann::json{{"k", s.k},
                       {"keys", s.keys},
                       {"labels", s.labels},
                       {"vectors", detail::matrix_to_json(s.vectors)}};
}

void from_json(const nlohmann::json& j, SimilarityIndex& s) {
    s.k = j.at("k").get<std::size_t>();
    s.keys = j.at("keys").get<std::vector<std::string>>();
    s.labels = j.at("labels").get<std::vector<std::size_t>>();
    s.vectors = detail::matrix_from_json(j.at("vectors"));
    if (s.keys.size() != s.labels.size() || static_cast<std::size_t>(s.vectors.rows()) != s.keys.size()) {
        throw FormatError("similarity index: inconsistent sizes");
    }
}

}  // namespace fixtime
