#include "support.hpp"

#include "fixtime/lifecycle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace fixtime {
namespace {

using testing::issue_with_statuses;

TEST(Categorize, Examples) {
    EXPECT_EQ(categorize(0.3), ResolutionCategory::LessThanHalfDay);
    EXPECT_EQ(categorize(0.5), ResolutionCategory::HalfToTwoDays);
    EXPECT_EQ(categorize(7.0), ResolutionCategory::MoreThanFiveDays);
}

TEST(Categorize, BoundariesAreLowerInclusive) {
    EXPECT_EQ(categorize(0.0), ResolutionCategory::LessThanHalfDay);
    EXPECT_EQ(categorize(std::nextafter(0.5, 0.0)), ResolutionCategory::LessThanHalfDay);
    EXPECT_EQ(categorize(2.0), ResolutionCategory::TwoToFiveDays);
    EXPECT_EQ(categorize(std::nextafter(2.0, 0.0)), ResolutionCategory::HalfToTwoDays);
    EXPECT_EQ(categorize(5.0), ResolutionCategory::MoreThanFiveDays);
    EXPECT_EQ(categorize(std::nextafter(5.0, 0.0)), ResolutionCategory::TwoToFiveDays);
}

TEST(Categorize, RejectsNegativeAndNonFinite) {
    EXPECT_THROW((void)categorize(-1e-9), std::domain_error);
    EXPECT_THROW((void)categorize(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
    EXPECT_THROW((void)categorize(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST(Categorize, MonotoneOverRandomPairs) {
    Rng rng(1);
    for (int i = 0; i < 5000; ++i) {
        const double a = 30.0 * rng.uniform();
        const double b = 30.0 * rng.uniform();
        if (a <= b) {
            EXPECT_LE(index_of(categorize(a)), index_of(categorize(b)));
        }
    }
}

TEST(Categorize, NamesRoundTrip) {
    for (const auto c : kAllCategories) {
        EXPECT_EQ(parse_category(category_name(c)), c);
    }
    EXPECT_FALSE(parse_category("Soon").has_value());
}

class LifecycleFixtures : public ::testing::TestWithParam<std::size_t> {};

TEST_P(LifecycleFixtures, MatchExpectedOutcome) {
    const auto fixtures = testing::lifecycle_fixtures();
    const auto& f = fixtures.at(GetParam());
    const auto got = extract_intervals(f.issue, StatusMap{}, f.mode);
    const auto mismatch = testing::outcome_mismatch(got, f.expected);
    EXPECT_FALSE(mismatch.has_value()) << f.name << ": " << mismatch.value_or("");
}

INSTANTIATE_TEST_SUITE_P(All, LifecycleFixtures, ::testing::Range<std::size_t>(0, 12));

TEST(ExtractIntervals, QuarterDayIsLessThanHalfDay) {
    const auto issue = issue_with_statuses("A-1", {{1, "In Progress"}, {1.25, "Resolved"}});
    const auto& iv = std::get<LifecycleIntervals>(extract_intervals(issue, StatusMap{}));
    EXPECT_EQ(iv.during_work, 0.25);
    EXPECT_EQ(categorize(iv.during_work), ResolutionCategory::LessThanHalfDay);
}

TEST(ExtractIntervals, NonStatusEntriesNeverChangeTheResult) {
    Rng rng(2);
    for (const auto& f : testing::lifecycle_fixtures()) {
        auto noisy = f.issue;
        for (int k = 0; k < 5; ++k) {
            const auto pos = static_cast<std::ptrdiff_t>(rng.index(noisy.changelog.size() + 1));
            noisy.changelog.insert(noisy.changelog.begin() + pos,
                                   {testing::at_days(10.0 * rng.uniform()), k % 2 ? "assignee" : "Priority", "x",
                                    "In Progress"});
        }
        EXPECT_FALSE(testing::outcome_mismatch(extract_intervals(noisy, StatusMap{}, f.mode), f.expected))
            << f.name;
    }
}

TEST(ExtractIntervals, AliasesFromTheStatusMap) {
    StatusMap map;
    map.in_progress = {"In Progress", "Coding"};
    map.resolved = {"Resolved", "Done"};
    const auto issue = issue_with_statuses("A-2", {{1, "coding"}, {4, "DONE"}});
    const auto& iv = std::get<LifecycleIntervals>(extract_intervals(issue, map));
    EXPECT_EQ(iv.before_work, 1.0);
    EXPECT_EQ(iv.during_work, 3.0);
}

TEST(StatusMap, ValidateRejectsOverlapAndEmptySets) {
    StatusMap overlap;
    overlap.closed.insert(" resolved ");
    EXPECT_THROW(overlap.validate(), ConfigError);
    StatusMap empty;
    empty.in_progress.clear();
    EXPECT_THROW(empty.validate(), ConfigError);
    EXPECT_NO_THROW(StatusMap{}.validate());
}

TEST(LabelCorpus, CountsNoWorkExclusions) {
    std::vector<RawIssue> issues;
    for (int i = 0; i < 8; ++i) {
        issues.push_back(issue_with_statuses("L-" + std::to_string(i), {{1, "In Progress"}, {1.0 + i, "Resolved"}}));
    }
    issues.push_back(issue_with_statuses("L-8", {{1, "Resolved"}}));
    issues.push_back(issue_with_statuses("L-9", {{1, "In Progress"}}));
    const auto r = label_corpus(issues, StatusMap{});
    EXPECT_EQ(r.corpus.size(), 8U);
    EXPECT_EQ(r.report.excluded.at("no_work"), 2U);
    EXPECT_EQ(r.report.details.size(), 2U);
}

TEST(LabelCorpus, AllNoWorkIsCorpusEmpty) {
    std::vector<RawIssue> issues{issue_with_statuses("E-1", {{1, "Resolved"}}),
                                 issue_with_statuses("E-2", {{2, "Resolved"}})};
    try {
        (void)label_corpus(issues, StatusMap{});
        FAIL() << "expected CorpusEmptyError";
    } catch (const CorpusEmptyError& e) {
        EXPECT_EQ(e.report().excluded.at("no_work"), 2U);
    }
}

TEST(LabelCorpus, SingleValidIssue) {
    const auto r = label_corpus({issue_with_statuses("S-1", {{1, "In Progress"}, {4, "Resolved"}})}, StatusMap{});
    ASSERT_EQ(r.corpus.size(), 1U);
    EXPECT_EQ(r.corpus.issues[0].intervals.during_work, 3.0);
    EXPECT_EQ(r.corpus.issues[0].category, ResolutionCategory::TwoToFiveDays);
}

TEST(LabelCorpus, InvalidIntervalsAreExcluded) {
    std::vector<RawIssue> issues{issue_with_statuses("I-1", {{1, "In Progress"}, {2, "Resolved"}}),
                                 issue_with_statuses("I-2", {{3, "In Progress"}, {1, "Resolved"}})};
    const auto r = label_corpus(issues, StatusMap{});
    EXPECT_EQ(r.corpus.size(), 1U);
    EXPECT_EQ(r.report.excluded.at("invalid"), 1U);
    EXPECT_EQ(r.report.details[0].second, "negative_during_work");
}

TEST(LabelCorpus, RejectsMixedProjects) {
    auto a = issue_with_statuses("A-1", {{1, "In Progress"}, {2, "Resolved"}});
    auto b = a;
    b.key = "B-1";
    b.project = "OTHER";
    EXPECT_THROW((void)label_corpus({a, b}, StatusMap{}), Error);
}

TEST(Corpus, JsonRoundTripIsExact) {
    const auto corpus = testing::planted_signal_corpus({.n_issues = 50, .seed = 3});
    const auto back = corpus_from_json(corpus_to_json(corpus));
    EXPECT_EQ(corpus_to_json(back).dump(), corpus_to_json(corpus).dump());
    ASSERT_EQ(back.size(), corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        EXPECT_EQ(back.issues[i].intervals.during_work, corpus.issues[i].intervals.during_work);
        EXPECT_EQ(back.issues[i].category, corpus.issues[i].category);
    }
}

}  // namespace
}  // namespace fixtime
