#include "fixtime/config.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace fixtime {
namespace {

using nlohmann::json;

TEST(ProjectConfig, DefaultRoundTrip) {
    const json d = default_config_json();
    EXPECT_EQ(d.at("format"), "fixtime.config");
    EXPECT_EQ(d.at("version"), 1);
    const auto c = d.get<ProjectConfig>();
    EXPECT_EQ(json(c), d);
    EXPECT_EQ(c.pipeline.seed, 42U);
    EXPECT_EQ(c.filter.min_issues_per_assignee, 20U);
    EXPECT_EQ(c.split.train_ratio, 0.8);
}

TEST(ProjectConfig, PartialDocumentKeepsDefaults) {
    const auto c = json{{"version", 1}, {"seed", 7}, {"stacking", {{"folds", 3}}}}.get<ProjectConfig>();
    EXPECT_EQ(c.pipeline.seed, 7U);
    EXPECT_EQ(c.split.seed, 7U);
    EXPECT_EQ(c.pipeline.folds, 3U);
    EXPECT_EQ(c.pipeline.similarity_k, 15U);
}

TEST(ProjectConfig, Rejections) {
    EXPECT_THROW((void)json({{"version", 1}, {"colour", "red"}}).get<ProjectConfig>(), ConfigError);
    EXPECT_THROW((void)json({{"seed", 1}}).get<ProjectConfig>(), ConfigError);
    EXPECT_THROW((void)json({{"version", 2}}).get<ProjectConfig>(), ConfigError);
    EXPECT_THROW((void)json({{"version", 1}, {"format", "x"}}).get<ProjectConfig>(), ConfigError);
    EXPECT_THROW((void)json({{"version", 1}, {"learners", {{"topics", "svm"}}}}).get<ProjectConfig>(), Error);
    EXPECT_THROW((void)json({{"version", 1}, {"during_work_mode", "fast"}}).get<ProjectConfig>(), ConfigError);
    EXPECT_THROW((void)json::array().get<ProjectConfig>(), ConfigError);
}

TEST(ProjectConfig, LoadFromFile) {
    const auto path = std::filesystem::temp_directory_path() / "fixtime_config_test.json";
    std::ofstream(path) << R"({"version": 1, "during_work_mode": "accumulated_active"})";
    EXPECT_EQ(load_config(path).during_work_mode, DuringWorkMode::AccumulatedActive);
    std::ofstream(path) << "{not json";
    EXPECT_THROW((void)load_config(path), ConfigError);
    EXPECT_THROW((void)load_config(path.string() + ".missing"), ConfigError);
}

class IngestRun : public ::testing::Test {
  protected:
    std::filesystem::path dump = std::filesystem::temp_directory_path() / "fixtime_run_ingest.jsonl";
};

TEST_F(IngestRun, ReportCountsAddUp) {
    testing::PlantedSpec spec;
    spec.n_issues = 120;
    auto issues = testing::planted_signal_issues(spec);
    issues[0].components.clear();
    issues[1].changelog.clear();
    testing::write_dump(issues, dump);
    ProjectConfig cfg;
    cfg.filter.min_issues_per_assignee = 1;
    const auto r = run_ingest(dump, cfg, ParseMode::Skip, std::nullopt);
    EXPECT_EQ(r.parsed, 120U);
    EXPECT_EQ(r.corpus.size(), 118U);
    const auto rep = ingest_report_json(r);
    EXPECT_EQ(rep.at("kept"), 118);
    EXPECT_EQ(r.corpus.provenance.dump_path, dump.string());
}

TEST_F(IngestRun, ProjectFilterAndEmptyCorpus) {
    testing::PlantedSpec spec;
    spec.n_issues = 30;
    testing::write_dump(testing::planted_signal_issues(spec), dump);
    ProjectConfig cfg;
    cfg.filter.min_issues_per_assignee = 1;
    EXPECT_THROW((void)run_ingest(dump, cfg, ParseMode::Skip, std::string("OTHER")), CorpusEmpty);
    EXPECT_EQ(run_ingest(dump, cfg, ParseMode::Skip, std::string("SYN")).corpus.size(), 30U);
}

TEST_F(IngestRun, EmbeddingsOnlyForPrecomputedSource) {
    PipelineConfig cfg;
    ProjectCorpus corpus;
    EXPECT_FALSE(load_configured_embeddings(cfg, corpus).has_value());
}

}  // namespace
}  // namespace fixtime
