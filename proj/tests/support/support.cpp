#include "support.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

namespace fixtime::testing {

Timestamp t0() { return *parse_timestamp("2020-01-01T00:00:00Z"); }

Timestamp at_days(double days) {
    return t0() + std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(days * 86'400'000.0)));
}

RawIssue issue_with_statuses(std::string key, const std::vector<std::pair<double, std::string>>& path) {
    RawIssue issue;
    issue.key = std::move(key);
    issue.project = "FIX";
    issue.summary = "fixture";
    issue.priority = "Major";
    issue.issue_type = "Bug";
    issue.created_at = t0();
    std::string from = "Open";
    for (const auto& [days, status] : path) {
        issue.changelog.push_back({at_days(days), "status", from, status});
        from = status;
    }
    issue.status = from;
    return issue;
}

namespace {

LifecycleIntervals intervals(double before, double during, std::optional<double> after) {
    return LifecycleIntervals{before, during, after};
}

}  // namespace

std::vector<LifecycleFixture> lifecycle_fixtures() {
    std::vector<LifecycleFixture> out;
    const auto add = [&](std::string name, RawIssue issue, IntervalOutcome expected,
                         DuringWorkMode mode = DuringWorkMode::Elapsed) {
        out.push_back({std::move(name), std::move(issue), mode, std::move(expected)});
    };
    add("straight path", issue_with_statuses("F-1", {{2, "In Progress"}, {5, "Resolved"}, {6, "Closed"}}),
        intervals(2.0, 3.0, 1.0));
    add("resolved without work", issue_with_statuses("F-2", {{1, "Resolved"}}), NoWorkSignal{"never_in_progress"});
    add("quarter day", issue_with_statuses("F-3", {{1, "In Progress"}, {1.25, "Resolved"}}),
        intervals(1.0, 0.25, std::nullopt));
    add("never closed", issue_with_statuses("F-4", {{0.5, "In Progress"}, {3, "Resolved"}}),
        intervals(0.5, 2.5, std::nullopt));
    add("never resolved", issue_with_statuses("F-5", {{1, "In Progress"}}), NoWorkSignal{"never_resolved"});

    const std::vector<std::pair<double, std::string>> reopened = {{1, "In Progress"}, {2, "Resolved"},
                                                                  {3, "Reopened"},    {4, "In Progress"},
                                                                  {6, "Resolved"},    {7, "Closed"}};
    add("reopened, elapsed", issue_with_statuses("F-6", reopened), intervals(1.0, 1.0, 5.0));
    add("reopened, accumulated", issue_with_statuses("F-7", reopened), intervals(1.0, 3.0, 1.0),
        DuringWorkMode::AccumulatedActive);
    add("skips in progress", issue_with_statuses("F-8", {{1, "Patch Available"}, {2, "Resolved"}, {3, "Closed"}}),
        NoWorkSignal{"never_in_progress"});

    auto backwards = issue_with_statuses("F-9", {{3, "In Progress"}, {1, "Resolved"}});
    add("resolution stamped before work", std::move(backwards), InvalidIntervals{"negative_during_work"});
    add("work stamped before creation", issue_with_statuses("F-10", {{-1, "In Progress"}, {2, "Resolved"}}),
        InvalidIntervals{"negative_before_work"});
    add("closure stamped before resolution",
        issue_with_statuses("F-11", {{1, "In Progress"}, {3, "Resolved"}, {2.5, "Closed"}}),
        InvalidIntervals{"negative_after_work"});

    auto mixed = issue_with_statuses("F-12", {{0.1, "RESOLVED"}, {0.2, " in progress "}, {1.2, "resolved"}});
    mixed.changelog.insert(mixed.changelog.begin() + 1, {at_days(0.15), "assignee", "", "alice"});
    mixed.changelog.push_back({at_days(1.3), "priority", "Major", "Minor"});
    add("early resolution, aliases and non-status entries", std::move(mixed), intervals(0.2, 1.0, std::nullopt));
    return out;
}

std::optional<std::string> outcome_mismatch(const IntervalOutcome& got, const IntervalOutcome& want) {
    if (got.index() != want.index()) {
        return fmt::format("outcome kind {} != expected {}", got.index(), want.index());
    }
    if (const auto* w = std::get_if<LifecycleIntervals>(&want)) {
        const auto& g = std::get<LifecycleIntervals>(got);
        if (g.before_work != w->before_work || g.during_work != w->during_work || g.after_work != w->after_work) {
            return fmt::format("intervals ({}, {}, {}) != expected ({}, {}, {})", g.before_work, g.during_work,
                               g.after_work ? fmt::format("{}", *g.after_work) : "none", w->before_work,
                               w->during_work, w->after_work ? fmt::format("{}", *w->after_work) : "none");
        }
        return std::nullopt;
    }
    if (const auto* w = std::get_if<NoWorkSignal>(&want)) {
        const auto& g = std::get<NoWorkSignal>(got);
        if (g.reason != w->reason) {
            return "no-work reason " + g.reason + " != " + w->reason;
        }
        return std::nullopt;
    }
    const auto& g = std::get<InvalidIntervals>(got);
    const auto& w = std::get<InvalidIntervals>(want);
    if (g.reason != w.reason) {
        return "invalid reason " + g.reason + " != " + w.reason;
    }
    return std::nullopt;
}

// ------------------------------------------------------------ planted data

namespace {

constexpr std::array<const char*, 4> kPriorities{"Blocker", "Critical", "Major", "Minor"};
constexpr std::array<const char*, 4> kTypes{"Bug", "Improvement", "Task", "Wish"};
constexpr std::array<const char*, 5> kComponents{"master", "agent", "scheduler", "webui", "storage"};
constexpr std::array<const char*, 5> kLabels{"performance", "docs", "flaky", "security", "usability"};

std::vector<std::string> pseudo_vocabulary() {
    constexpr std::array<const char*, 12> onsets{"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t"};
    constexpr std::array<const char*, 5> vowels{"a", "e", "i", "o", "u"};
    std::vector<std::string> words;
    for (std::size_t i = 0; i < 240; ++i) {
        std::string w;
        w += onsets[i % onsets.size()];
        w += vowels[(i / onsets.size()) % vowels.size()];
        w += onsets[(i / 60) % onsets.size()];
        w += vowels[(i * 7) % vowels.size()];
        w += "x";
        words.push_back(w);
    }
    return words;
}

double sample_days(Rng& rng, ResolutionCategory c) {
    switch (c) {
        case ResolutionCategory::LessThanHalfDay:
            return 0.02 + 0.45 * rng.uniform();
        case ResolutionCategory::HalfToTwoDays:
            return 0.55 + 1.4 * rng.uniform();
        case ResolutionCategory::TwoToFiveDays:
            return 2.05 + 2.9 * rng.uniform();
        case ResolutionCategory::MoreThanFiveDays:
            return 5.1 + 10.0 * rng.uniform();
    }
    return 1.0;
}

std::string sentence(Rng& rng, const std::vector<std::string>& vocab, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += vocab[rng.index(vocab.size())];
    }
    return out;
}

}  // namespace

ResolutionCategory planted_category(std::string_view priority) {
    for (std::size_t i = 0; i < kPriorities.size(); ++i) {
        if (priority == kPriorities[i]) {
            return kAllCategories[i];
        }
    }
    throw Error("not a planted priority: " + std::string(priority));
}

std::vector<RawIssue> planted_signal_issues(const PlantedSpec& spec) {
    Rng rng(spec.seed);
    const auto vocab = pseudo_vocabulary();
    std::vector<RawIssue> out;
    out.reserve(spec.n_issues);
    for (std::size_t i = 0; i < spec.n_issues; ++i) {
        RawIssue issue;
        issue.key = fmt::format("{}-{}", spec.project, i + 1);
        issue.project = spec.project;
        const auto p = rng.index(kPriorities.size());
        issue.priority = kPriorities[p];
        std::size_t category = p;
        if (rng.uniform() >= spec.signal) {
            category = (p + 1 + rng.index(kNumCategories - 1)) % kNumCategories;
        }
        issue.issue_type = kTypes[rng.index(kTypes.size())];
        issue.components = {kComponents[rng.index(kComponents.size())]};
        issue.labels = {kLabels[rng.index(kLabels.size())]};
        issue.assignee = fmt::format("dev{:02}", rng.index(spec.n_assignees));
        issue.summary = sentence(rng, vocab, 6);
        issue.description = sentence(rng, vocab, 14);
        issue.resolution = "Fixed";
        issue.status = "Closed";
        issue.created_at = t0() + std::chrono::hours(3 * static_cast<std::int64_t>(i));
        const double before = 3.0 * rng.uniform();
        const double during = sample_days(rng, kAllCategories[category]);
        const double after = 2.0 * rng.uniform();
        const auto at = [&](double days) {
            return issue.created_at +
                   std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(days * 86'400'000.0)));
        };
        issue.changelog = {{at(before), "status", "Open", "In Progress"},
                           {at(before + during), "status", "In Progress", "Resolved"},
                           {at(before + during + after), "status", "Resolved", "Closed"}};
        out.push_back(std::move(issue));
    }
    return out;
}

ProjectCorpus planted_signal_corpus(const PlantedSpec& spec) {
    return label_corpus(planted_signal_issues(spec), StatusMap{}).corpus;
}

PipelineConfig fast_pipeline_config(std::uint64_t seed) {
    PipelineConfig c;
    c.seed = seed;
    c.text.embeddings.dimension = 40;
    c.topics.k_range = topics::KRange{4, 6};
    c.forest.n_trees = 30;
    return c;
}

void write_dump(const std::vector<RawIssue>& issues, const std::filesystem::path& path) {
    std::ofstream out(path);
    for (const auto& issue : issues) {
        out << issue_to_json(issue).dump() << "\n";
    }
}

// ---------------------------------------------------------------- oracles

learn::Dataset random_dataset(Rng& rng, std::size_t n, std::size_t p, std::size_t n_classes, bool integer_features) {
    learn::Dataset d;
    d.n_classes = n_classes;
    d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.X.cols(); ++j) {
            d.X(i, j) = integer_features ? static_cast<double>(rng.index(4)) : rng.normal();
        }
    }
    d.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.y[i] = i < n_classes ? i : static_cast<std::size_t>(rng.index(n_classes));
    }
    rng.shuffle(d.y);
    return d;
}

NaiveMetrics naive_metrics(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                           std::size_t n_classes) {
    NaiveMetrics m;
    const auto n = y_true.size();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (y_true[i] == y_pred[i]) {
            ++correct;
        }
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    double macro = 0.0;
    std::size_t counted = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        std::size_t tp = 0;
        std::size_t fp = 0;
        std::size_t fn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (y_pred[i] == c && y_true[i] == c) {
                ++tp;
            } else if (y_pred[i] == c) {
                ++fp;
            } else if (y_true[i] == c) {
                ++fn;
            }
        }
        if (tp + fp + fn == 0) {
            continue;
        }
        const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        const double f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
        macro += f1;
        ++counted;
        m.f1_weighted += f1 * static_cast<double>(tp + fn) / static_cast<double>(n);
    }
    m.f1_macro = counted == 0 ? 0.0 : macro / static_cast<double>(counted);
    return m;
}

double brute_force_root_decrease(const learn::Dataset& data, std::size_t min_leaf) {
    const auto n = data.rows();
    const auto C = data.n_classes;
    const auto gini_of = [&](const std::vector<std::size_t>& rows) {
        if (rows.empty()) {
            return 0.0;
        }
        double g = 1.0;
        for (std::size_t c = 0; c < C; ++c) {
            const auto k = std::count_if(rows.begin(), rows.end(), [&](std::size_t r) { return data.y[r] == c; });
            const double p = static_cast<double>(k) / static_cast<double>(rows.size());
            g -= p * p;
        }
        return g;
    };
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) {
        all[i] = i;
    }
    const double parent = gini_of(all);
    double best = 0.0;
    for (Eigen::Index f = 0; f < data.X.cols(); ++f) {
        for (std::size_t pivot = 0; pivot < n; ++pivot) {
            const double v = data.X(static_cast<Eigen::Index>(pivot), f);
            std::vector<std::size_t> left;
            std::vector<std::size_t> right;
            for (std::size_t r = 0; r < n; ++r) {
                (data.X(static_cast<Eigen::Index>(r), f) <= v ? left : right).push_back(r);
            }
            if (left.size() < min_leaf || right.size() < min_leaf) {
                continue;
            }
            const double nl = static_cast<double>(left.size());
            const double nr = static_cast<double>(right.size());
            const double total = static_cast<double>(n);
            best = std::max(best, parent - nl / total * gini_of(left) - nr / total * gini_of(right));
        }
    }
    return best;
}

NumericGradient numeric_gradient(const Eigen::MatrixXd& X, std::span<const std::size_t> y, const Eigen::MatrixXd& W,
                                 const Eigen::VectorXd& b, double l2, double h) {
    NumericGradient g;
    g.weights.resizeLike(W);
    g.bias.resizeLike(b);
    const auto loss = [&](const Eigen::MatrixXd& w, const Eigen::VectorXd& bias) {
        return learn::logreg_objective(X, y, w, bias, l2).loss;
    };
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            Eigen::MatrixXd plus = W;
            Eigen::MatrixXd minus = W;
            plus(i, j) += h;
            minus(i, j) -= h;
            g.weights(i, j) = (loss(plus, b) - loss(minus, b)) / (2.0 * h);
        }
    }
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        Eigen::VectorXd plus = b;
        Eigen::VectorXd minus = b;
        plus(i) += h;
        minus(i) -= h;
        g.bias(i) = (loss(W, plus) - loss(W, minus)) / (2.0 * h);
    }
    return g;
}

std::vector<double> reference_meta_probs(const learn::LogRegModel& meta, std::span<const double> x) {
    const auto C = meta.weights.rows();
    std::vector<double> logits(static_cast<std::size_t>(C));
    for (Eigen::Index c = 0; c < C; ++c) {
        double z = meta.bias(c);
        for (std::size_t j = 0; j < x.size(); ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            z += meta.weights(c, jj) * (x[j] - meta.standardizer.mean(jj)) / meta.standardizer.scale(jj);
        }
        logits[static_cast<std::size_t>(c)] = z;
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (auto& z : logits) {
        z = std::exp(z - top);
        sum += z;
    }
    for (auto& z : logits) {
        z /= sum;
    }
    return logits;
}

}  // namespace fixtime::testing
