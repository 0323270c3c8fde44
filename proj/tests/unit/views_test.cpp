#include "fixtime/views.hpp"

#include "fixtime/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace fixtime {
namespace {

TEST(Primary, FirstListedValue) {
    EXPECT_EQ(primary({"allocation", "master"}), "allocation");
    EXPECT_EQ(primary({}), "");
}

TEST(CategoricalEncoder, OneHotAndUnseenValue) {
    const std::vector<std::string> raw{"Blocker", "Major", "Minor", "Trivial", "Major"};
    const std::vector<std::size_t> labels{3, 1, 0, 0, 2};
    const auto e = CategoricalEncoder::fit(raw, labels);
    ASSERT_EQ(e.dim(), 4U);
    const auto hot = e.encode("Blocker");
    EXPECT_EQ(std::count(hot.begin(), hot.end(), 1.0), 1);
    EXPECT_EQ(hot[*e.find("blocker")], 1.0);
    EXPECT_EQ(e.encode("  MAJOR "), e.encode("Major"));
    EXPECT_EQ(e.encode("Critical"), std::vector<double>(4, 0.0));
    EXPECT_EQ(e.counts[*e.find("major")], (CategoryCounts{0, 1, 1, 0}));
}

TEST(AssigneeProfiles, StatisticsAndHistogram) {
    std::vector<AssigneeProfiles::Row> rows;
    for (int i = 0; i < 5; ++i) {
        rows.push_back({"Alice", i < 3 ? "allocation" : "master", 1.0 + i, static_cast<std::size_t>(i % 4)});
    }
    rows.push_back({std::nullopt, "allocation", 9.0, 3});
    const auto p = AssigneeProfiles::fit(rows);
    const auto* a = p.find(std::string("alice"));
    ASSERT_NE(a, nullptr);
    EXPECT_EQ(a->count, 5U);
    EXPECT_DOUBLE_EQ(a->mean_days, 3.0);
    EXPECT_DOUBLE_EQ(a->median_days, 3.0);
    std::size_t total = 0;
    for (const auto c : a->histogram) {
        total += c;
    }
    EXPECT_EQ(total, a->count);
    EXPECT_EQ(p.features(std::nullopt, "allocation"), std::vector<double>(AssigneeProfiles::kDim, 0.0));
    EXPECT_EQ(p.features(std::string("nobody"), "x"), std::vector<double>(AssigneeProfiles::kDim, 0.0));
    const auto f = p.features(std::string("Alice"), "allocation");
    EXPECT_EQ(f[0], 5.0);
    EXPECT_EQ(f[7], 1.0);
}

TEST(AssigneeProfiles, TrainingRowsMatchPredictionFeaturesExceptSelfFlag) {
    Rng rng(3);
    std::vector<AssigneeProfiles::Row> rows;
    const std::vector<std::string> comps{"a", "b", "c", "d", "e", "f"};
    for (int i = 0; i < 60; ++i) {
        rows.push_back({"dev" + std::to_string(rng.index(4)), comps[rng.index(comps.size())], rng.uniform() * 10,
                        rng.index(4)});
    }
    const auto p = AssigneeProfiles::fit(rows);
    const auto train = p.training_features(rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto f = p.features(rows[i].assignee, rows[i].primary_component);
        for (std::size_t c = 0; c < 7; ++c) {
            EXPECT_EQ(train(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)), f[c]);
        }
        const auto* prof = p.find(rows[i].assignee);
        const bool others = prof->components.at(rows[i].primary_component) > 1;
        EXPECT_EQ(train(static_cast<Eigen::Index>(i), 7), others ? 1.0 : 0.0);
    }
}

TEST(AssigneeProfiles, TrainingFeaturesIgnoreRowOrder) {
    Rng rng(4);
    std::vector<AssigneeProfiles::Row> rows;
    for (int i = 0; i < 30; ++i) {
        rows.push_back({"dev" + std::to_string(rng.index(3)), "c" + std::to_string(rng.index(3)), rng.uniform(),
                        rng.index(4)});
    }
    auto reversed = rows;
    std::reverse(reversed.begin(), reversed.end());
    const auto a = AssigneeProfiles::fit(rows).training_features(rows);
    const auto b = AssigneeProfiles::fit(reversed).training_features(reversed);
    EXPECT_LE((a - b.colwise().reverse()).cwiseAbs().maxCoeff(), 1e-12);
}

SimilarityIndex toy_index(std::size_t k) {
    Eigen::MatrixXd v(5, 2);
    v << 1, 0, 0, 1, std::sqrt(0.5), std::sqrt(0.5), -1, 0, 0.6, 0.8;
    return SimilarityIndex::build({"K-1", "K-2", "K-3", "K-4", "K-5"}, v, {0, 1, 2, 3, 3}, k);
}

TEST(Similarity, IdenticalQueryTopOne) {
    const auto idx = toy_index(1);
    const std::vector<double> q{-1, 0};
    const auto f = idx.features(q);
    EXPECT_EQ(f, (std::vector<double>{0, 0, 0, 1, 1.0, 1.0}));
}

TEST(Similarity, ZeroQueryAndClampedK) {
    const auto idx = toy_index(50);
    const std::vector<double> zero{0, 0};
    EXPECT_EQ(idx.features(zero), (std::vector<double>{0.25, 0.25, 0.25, 0.25, 0, 0}));
    const std::vector<double> q{1, 0};
    EXPECT_EQ(idx.neighbors(q, 50).size(), 5U);
}

TEST(Similarity, MatchesExhaustiveOracle) {
    const auto idx = toy_index(3);
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> q{rng.normal(), rng.normal()};
        const double n = std::hypot(q[0], q[1]);
        q[0] /= n;
        q[1] /= n;
        std::vector<std::pair<double, std::size_t>> sims;
        for (std::size_t r = 0; r < 5; ++r) {
            sims.emplace_back(-(idx.vectors(static_cast<Eigen::Index>(r), 0) * q[0] +
                                idx.vectors(static_cast<Eigen::Index>(r), 1) * q[1]),
                              r);
        }
        std::sort(sims.begin(), sims.end());
        std::vector<double> hist(4, 0.0);
        double sum = 0.0;
        double weight = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            const double s = -sims[i].first;
            sum += s;
            const double w = std::max(s, 0.0);
            hist[idx.labels[sims[i].second]] += w;
            weight += w;
        }
        const auto f = idx.features(q);
        for (std::size_t c = 0; c < 4; ++c) {
            EXPECT_NEAR(f[c], weight > 0 ? hist[c] / weight : 0.25, 1e-9);
        }
        EXPECT_NEAR(f[4], -sims[0].first, 1e-9);
        EXPECT_NEAR(f[5], sum / 3.0, 1e-9);
    }
}

TEST(Similarity, TiesGoToEarlierKeyAndSelfIsExcluded) {
    Eigen::MatrixXd v(3, 1);
    v << 1, 1, 1;
    const auto idx = SimilarityIndex::build({"A-1", "A-2", "A-3"}, v, {0, 1, 2}, 1);
    const std::vector<double> q{1};
    EXPECT_EQ(idx.neighbors(q, 1)[0].row, 0U);
    EXPECT_EQ(idx.neighbors(q, 1, "A-1")[0].row, 1U);
    const std::vector<std::string> keys{"A-1", "A-2", "A-3"};
    const auto batch = idx.features_batch(v, keys);
    EXPECT_EQ(batch(0, 1), 1.0);
    EXPECT_EQ(batch(1, 0), 1.0);
}

TEST(Views, NamesRoundTrip) {
    for (const auto v : kAllViews) {
        EXPECT_EQ(parse_view(view_name(v)), v);
    }
    EXPECT_FALSE(parse_view("votes").has_value());
}

TEST(ViewsJson, RoundTrip) {
    const auto idx = toy_index(2);
    const auto back = nlohmann::json(idx).get<SimilarityIndex>();
    EXPECT_TRUE(back.vectors == idx.vectors);
    EXPECT_EQ(back.keys, idx.keys);
    std::vector<AssigneeProfiles::Row> rows{{"Bob", "x", 2.0, 1}, {"bob", "y", 4.0, 3}};
    const auto p = AssigneeProfiles::fit(rows);
    const auto q = nlohmann::json(p).get<AssigneeProfiles>();
    EXPECT_EQ(q.features(std::string("BOB"), "x"), p.features(std::string("bob"), "x"));
}

}  // namespace
}  // namespace fixtime
