#include "fixtime/eval.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace fixtime {
namespace {

using fixtime::testing::at_days;
using fixtime::testing::fast_pipeline_config;
using fixtime::testing::PlantedSpec;
using fixtime::testing::planted_signal_corpus;

std::vector<std::size_t> labels_with_counts(const std::vector<std::size_t>& counts) {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        out.insert(out.end(), counts[c], c);
    }
    return out;
}

TEST(AllocateTrainCounts, HandArithmetic) {
    EXPECT_EQ(allocate_train_counts(std::vector<std::size_t>{50, 30, 20}, 0.8), (std::vector<std::size_t>{40, 24, 16}));
    EXPECT_EQ(allocate_train_counts(std::vector<std::size_t>{5, 5}, 0.8), (std::vector<std::size_t>{4, 4}));
    // 0.8 * (3, 3, 3) = 2.4 each; total round(7.2) = 7, remainder to class 0.
    EXPECT_EQ(allocate_train_counts(std::vector<std::size_t>{3, 3, 3}, 0.8), (std::vector<std::size_t>{3, 2, 2}));
}

TEST(StratifiedSplit, RandomMultisetsSatisfyContract) {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::size_t> counts(4);
        for (auto& c : counts) {
            c = 2 + rng.index(40);
        }
        auto labels = labels_with_counts(counts);
        for (std::size_t i = labels.size(); i > 1; --i) {
            std::swap(labels[i - 1], labels[rng.index(i)]);
        }
        SplitSpec spec;
        spec.train_ratio = 0.5 + 0.4 * rng.uniform();
        spec.seed = rng.next();
        const auto s = stratified_split(labels, 4, spec);
        const auto again = stratified_split(labels, 4, spec);
        EXPECT_EQ(s.train, again.train);
        EXPECT_EQ(s.test, again.test);
        std::vector<std::size_t> all = s.train;
        all.insert(all.end(), s.test.begin(), s.test.end());
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> expect(labels.size());
        std::iota(expect.begin(), expect.end(), 0);
        EXPECT_EQ(all, expect);
        EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
        EXPECT_EQ(s.train.size(), static_cast<std::size_t>(std::llround(spec.train_ratio * static_cast<double>(labels.size()))));
        for (std::size_t c = 0; c < 4; ++c) {
            const auto got = static_cast<double>(
                std::count_if(s.train.begin(), s.train.end(), [&](std::size_t i) { return labels[i] == c; }));
            EXPECT_LE(std::abs(got - spec.train_ratio * static_cast<double>(counts[c])), 1.0);
        }
    }
}

TEST(StratifiedSplit, SeedChangesTheSplit) {
    const auto labels = labels_with_counts({10, 10, 10});
    SplitSpec a;
    a.seed = 1;
    SplitSpec b;
    b.seed = 2;
    EXPECT_NE(stratified_split(labels, 3, a).train, stratified_split(labels, 3, b).train);
}

TEST(StratifiedSplit, SingletonClassRejected) {
    const auto labels = labels_with_counts({5, 1, 5});
    EXPECT_THROW((void)stratified_split(labels, 3, SplitSpec{}), StratificationError);
    SplitSpec bad;
    bad.train_ratio = 1.0;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(StratifiedSplit, TemporalModeTrainsOnEarliest) {
    const auto labels = labels_with_counts({5, 5});
    std::vector<Timestamp> created;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        created.push_back(at_days(static_cast<double>(10 - i)));
    }
    SplitSpec spec;
    spec.temporal = true;
    const auto s = stratified_split(labels, 2, spec, created);
    EXPECT_EQ(s.test, (std::vector<std::size_t>{0, 5}));
}

TEST(MeanStd, PopulationDeviation) {
    const std::vector<double> v{1, 2, 3, 4};
    const auto m = mean_std(v);
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_DOUBLE_EQ(m.stddev, std::sqrt(1.25));
}

LabeledIssue labeled(std::string key, std::string priority, std::string type, std::string component,
                     ResolutionCategory c) {
    LabeledIssue li;
    li.issue.key = std::move(key);
    li.issue.project = "T";
    li.issue.priority = std::move(priority);
    li.issue.issue_type = std::move(type);
    li.issue.components = {std::move(component)};
    li.category = c;
    return li;
}

TEST(Insights, OnePerCategoryAllMajor) {
    ProjectCorpus corpus;
    for (const auto c : kAllCategories) {
        corpus.issues.push_back(labeled("T-" + std::to_string(index_of(c)), "Major", "Bug", "core", c));
    }
    const auto t = insights(corpus);
    ASSERT_EQ(t.by_priority.rows, std::vector<std::string>{"Major"});
    EXPECT_EQ(t.by_priority.counts[0], (CategoryCounts{1, 1, 1, 1}));
    EXPECT_FALSE(t.by_topic.has_value());
}

TEST(Insights, HandTallyOfTwentyIssues) {
    ProjectCorpus corpus;
    const std::vector<std::string> prios{"Blocker", "Major", "Minor", " Major "};
    const std::vector<std::string> types{"Bug", "Task"};
    std::map<std::pair<std::string, std::size_t>, std::size_t> oracle;
    for (std::size_t i = 0; i < 20; ++i) {
        const auto c = kAllCategories[(i * 3) % 4];
        const auto& p = prios[i % 4];
        corpus.issues.push_back(labeled("T-" + std::to_string(i), p, types[i % 2], i < 5 ? "" : "c" + std::to_string(i % 3), c));
        ++oracle[{p == " Major " ? "Major" : p, index_of(c)}];
    }
    const std::vector<std::size_t> topic(20, 1);
    const auto t = insights(corpus, std::span<const std::size_t>(topic));
    for (std::size_t r = 0; r < t.by_priority.rows.size(); ++r) {
        for (std::size_t c = 0; c < kNumCategories; ++c) {
            EXPECT_EQ(t.by_priority.counts[r][c], oracle[std::make_pair(t.by_priority.rows[r], c)]);
        }
    }
    EXPECT_EQ(t.by_priority.rows.size(), 3U);
    EXPECT_NE(std::find(t.by_component.rows.begin(), t.by_component.rows.end(), "(none)"), t.by_component.rows.end());
    for (const auto* tab : {&t.by_priority, &t.by_issue_type, &t.by_component, &*t.by_topic}) {
        EXPECT_EQ(tab->total(), 20U) << tab->dimension;
        for (const auto& row : tab->proportions()) {
            EXPECT_NEAR(row[0] + row[1] + row[2] + row[3], 1.0, 1e-9);
        }
    }
    const auto back = insights_from_json(insights_to_json(t));
    EXPECT_EQ(insights_to_json(back), insights_to_json(t));
}

TEST(Insights, CsvShapeAndFiles) {
    ProjectCorpus corpus;
    corpus.issues.push_back(labeled("T-1", "Major", "Bug", "core", ResolutionCategory::TwoToFiveDays));
    const auto t = insights(corpus);
    const auto csv = crosstab_csv(t.by_priority);
    EXPECT_EQ(csv,
              "dimension,value,LessThanHalfDay,HalfToTwoDays,TwoToFiveDays,MoreThanFiveDays,total\n"
              "priority,Major,0,0,1,0,1\n");
    const auto dir = std::filesystem::temp_directory_path() / "fixtime_insights_csv";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    EXPECT_EQ(write_insight_csvs(t, dir).size(), 6U);
    EXPECT_THROW((void)insights(ProjectCorpus{}), CorpusEmpty);
}

TEST(Evaluate, ShuffledLabelsFallToMajorityRate) {
    PlantedSpec spec;
    spec.n_issues = 500;
    spec.seed = 3;
    auto corpus = planted_signal_corpus(spec);
    Rng rng(4);
    std::vector<ResolutionCategory> cats;
    for (const auto& li : corpus.issues) {
        cats.push_back(li.category);
    }
    for (std::size_t i = cats.size(); i > 1; --i) {
        std::swap(cats[i - 1], cats[rng.index(i)]);
    }
    std::array<std::size_t, kNumCategories> counts{};
    for (std::size_t i = 0; i < cats.size(); ++i) {
        corpus.issues[i].category = cats[i];
        ++counts[index_of(cats[i])];
    }
    const double majority =
        static_cast<double>(*std::max_element(counts.begin(), counts.end())) / static_cast<double>(cats.size());
    SplitSpec split;
    split.seed = 5;
    const auto r = evaluate(corpus, fast_pipeline_config(5), split);
    EXPECT_NEAR(r.metrics.accuracy, majority, 0.1);
    EXPECT_EQ(r.n_train + r.n_test, corpus.size());
    const auto re = learn::metrics_from_confusion(r.metrics.confusion);
    EXPECT_EQ(re.accuracy, r.metrics.accuracy);
    EXPECT_EQ(re.f1_macro, r.metrics.f1_macro);
    EXPECT_EQ(re.f1_weighted, r.metrics.f1_weighted);
}

TEST(Evaluate, MultiSeedSummary) {
    PlantedSpec spec;
    spec.n_issues = 300;
    const auto corpus = planted_signal_corpus(spec);
    SplitSpec split;
    split.seed = 10;
    const auto r = evaluate_seeds(corpus, fast_pipeline_config(10), split, 2);
    ASSERT_EQ(r.runs.size(), 2U);
    EXPECT_EQ(r.runs[0].seed, 10U);
    EXPECT_EQ(r.runs[1].seed, 11U);
    const std::vector<double> acc{r.runs[0].metrics.accuracy, r.runs[1].metrics.accuracy};
    EXPECT_DOUBLE_EQ(r.accuracy.mean, mean_std(acc).mean);
    const auto j = report_to_json(r);
    EXPECT_EQ(j.at("runs").size(), 2U);
    const auto csv = report_csv(r);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Bundle, SaveLoadPredictsIdentically) {
    PlantedSpec spec;
    spec.n_issues = 300;
    const auto corpus = planted_signal_corpus(spec);
    const auto bundle = train_bundle(corpus, fast_pipeline_config(1), nullptr);
    EXPECT_EQ(bundle.insights.corpus_size, corpus.size());
    ASSERT_TRUE(bundle.insights.by_topic.has_value());
    EXPECT_EQ(bundle.insights.by_topic->total(), corpus.size());
    const auto path = std::filesystem::temp_directory_path() / "fixtime_bundle_test.json";
    save_bundle(bundle, path);
    const auto back = load_bundle(path);
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_EQ(predict(bundle.model, corpus.issues[i].issue).final_probs,
                  predict(back.model, corpus.issues[i].issue).final_probs);
    }
    std::ofstream(path) << "{\"format\": \"other\"}";
    EXPECT_THROW((void)load_bundle(path), Error);
}

}  // namespace
}  // namespace fixtime
