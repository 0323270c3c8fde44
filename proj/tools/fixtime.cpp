#include "fixtime/config.hpp"
#include "fixtime/error.hpp"
#include "fixtime/serve.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fixtime;

namespace {

constexpr int kExitError = 1;
constexpr int kExitCorpusEmpty = 2;

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << text;
}

ProjectConfig config_or_default(const std::string& path) {
    return path.empty() ? ProjectConfig{} : load_config(path);
}

void print_probs(const ClassProbs& p) {
    for (const auto c : kAllCategories) {
        fmt::print("  {:<18} {:.4f}\n", category_name(c), p[index_of(c)]);
    }
}

void print_crosstab(const CrossTab& t) {
    fmt::print("{} ({} issues)\n", t.dimension, t.total());
    fmt::print("  {:<24}", "value");
    for (const auto c : kAllCategories) {
        fmt::print(" {:>12}", category_label(c));
    }
    fmt::print(" {:>8}\n", "total");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::size_t sum = 0;
        fmt::print("  {:<24}", t.rows[r]);
        for (const auto n : t.counts[r]) {
            fmt::print(" {:>12}", n);
            sum += n;
        }
        fmt::print(" {:>8}\n", sum);
    }
}

// -------------------------------------------------------------- commands

struct InitConfigArgs {
    std::string out;
};

int cmd_init_config(const InitConfigArgs& a) {
    const auto text = default_config_json().dump(2) + "\n";
    if (a.out.empty()) {
        std::cout << text;
    } else {
        write_text(a.out, text);
        fmt::print("wrote {}\n", a.out);
    }
    return 0;
}

struct IngestArgs {
    std::string dump;
    std::string config;
    std::string out;
    std::string report;
    std::string project;
    bool strict = false;
};

int cmd_ingest(const IngestArgs& a) {
    const auto config = config_or_default(a.config);
    const auto project = a.project.empty() ? std::nullopt : std::optional<std::string>(a.project);
    IngestResult r;
    try {
        r = run_ingest(a.dump, config, a.strict ? ParseMode::Abort : ParseMode::Skip, project);
    } catch (const CorpusEmptyError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        for (const auto& [reason, n] : e.report().excluded) {
            fmt::print(stderr, "  excluded {:<24} {}\n", reason, n);
        }
        return kExitCorpusEmpty;
    }
    save_corpus(r.corpus, a.out);
    fmt::print("project {}: parsed {}, malformed {}, rejected records {}\n", r.corpus.project, r.parsed,
               r.malformed.size(), r.rejected.size());
    for (const auto& [reason, n] : r.filter.rejected) {
        fmt::print("  filtered {:<28} {}\n", reason, n);
    }
    for (const auto& [reason, n] : r.label.excluded) {
        fmt::print("  excluded {:<28} {}\n", reason, n);
    }
    fmt::print("kept {} issues -> {}\n", r.corpus.size(), a.out);
    if (!a.report.empty()) {
        write_text(a.report, ingest_report_json(r).dump(2) + "\n");
    }
    return 0;
}

struct TrainArgs {
    std::string corpus;
    std::string config;
    std::string out;
};

int cmd_train(const TrainArgs& a) {
    const auto config = config_or_default(a.config);
    const auto corpus = load_corpus(a.corpus);
    const auto embeddings = load_configured_embeddings(config.pipeline, corpus);
    const auto bundle = train_bundle(corpus, config.pipeline, embeddings ? &*embeddings : nullptr);
    save_bundle(bundle, a.out);
    fmt::print("trained {} on {} issues: {} topics, vocabulary {}, embedding dim {} -> {}\n", bundle.model.project,
               bundle.model.n_train, bundle.model.topics.k(), bundle.model.vectorizer.terms.size(),
               bundle.model.embedding_dim, a.out);
    return 0;
}

struct EvaluateArgs {
    std::string corpus;
    std::string config;
    std::size_t seeds = 1;
    std::string out_json;
    std::string out_csv;
};

int cmd_evaluate(const EvaluateArgs& a) {
    const auto config = config_or_default(a.config);
    const auto corpus = load_corpus(a.corpus);
    const auto embeddings = load_configured_embeddings(config.pipeline, corpus);
    const auto report =
        evaluate_seeds(corpus, config.pipeline, config.split, a.seeds, embeddings ? &*embeddings : nullptr);
    for (const auto& run : report.runs) {
        fmt::print("seed {:<6} train {:<6} test {:<6} accuracy {:.4f}  macro F1 {:.4f}  weighted F1 {:.4f}\n",
                   run.seed, run.n_train, run.n_test, run.metrics.accuracy, run.metrics.f1_macro,
                   run.metrics.f1_weighted);
        std::string solo;
        for (const auto v : kAllViews) {
            solo += fmt::format(" {}={:.3f}", view_name(v), run.solo_accuracy[index_of(v)]);
        }
        fmt::print("  solo views:{}\n", solo);
    }
    fmt::print("accuracy    {:.4f} ± {:.4f}\n", report.accuracy.mean, report.accuracy.stddev);
    fmt::print("macro F1    {:.4f} ± {:.4f}\n", report.f1_macro.mean, report.f1_macro.stddev);
    fmt::print("weighted F1 {:.4f} ± {:.4f}\n", report.f1_weighted.mean, report.f1_weighted.stddev);
    if (!a.out_json.empty()) {
        write_text(a.out_json, report_to_json(report).dump(2) + "\n");
    }
    if (!a.out_csv.empty()) {
        write_text(a.out_csv, report_csv(report));
    }
    return 0;
}

struct PredictArgs {
    std::string bundle;
    std::string issue;
    bool explain = false;
    bool json = false;
};

int cmd_predict(const PredictArgs& a) {
    const auto bundle = load_bundle(a.bundle);
    const auto input = prediction_input_from_json(read_json_file(a.issue));
    const auto prediction = predict(bundle.model, input);
    if (a.json) {
        auto out = prediction_to_json(prediction);
        if (a.explain) {
            out["explanation"] = explanation_to_json(explain(bundle.model, input, prediction));
        }
        std::cout << out.dump(2) << "\n";
        return 0;
    }
    fmt::print("{}: {} ({})\n", prediction.issue_key, category_name(prediction.predicted),
               category_label(prediction.predicted));
    print_probs(prediction.final_probs);
    if (a.explain) {
        const auto e = explain(bundle.model, input, prediction);
        fmt::print("views:\n");
        for (const auto& v : e.views) {
            fmt::print("  {:<11} {:<17} {:.4f} {}  {}\n", view_name(v.view), category_name(v.top_category),
                       v.probability, v.agrees ? "agrees " : "differs", v.narrative);
        }
    }
    return 0;
}

struct TopicsArgs {
    std::string bundle;
    bool json = false;
};

int cmd_topics(const TopicsArgs& a) {
    const auto bundle = load_bundle(a.bundle);
    const auto& model = bundle.model.topics;
    if (a.json) {
        std::cout << topics::topic_report(model).dump(2) << "\n";
        return 0;
    }
    fmt::print("{} topics\n", model.k());
    for (std::size_t t = 0; t < model.k(); ++t) {
        std::string words;
        if (t < model.keywords.size()) {
            for (const auto& kw : model.keywords[t]) {
                words += fmt::format(" {}({:.3f})", kw.token, kw.score);
            }
        }
        fmt::print("  topic {:<3} size {:<6}{}\n", t, t < model.sizes.size() ? model.sizes[t] : 0, words);
    }
    return 0;
}

struct InsightsArgs {
    std::string corpus;
    std::string bundle;
    std::string out_csv;
    std::string out_json;
};

int cmd_insights(const InsightsArgs& a) {
    const auto corpus = load_corpus(a.corpus);
    InsightTables tables;
    if (a.bundle.empty()) {
        tables = insights(corpus);
    } else {
        const auto bundle = load_bundle(a.bundle);
        const auto embeddings = load_configured_embeddings(bundle.model.config, corpus);
        const auto topic_of = assign_corpus_topics(bundle.model, corpus, embeddings ? &*embeddings : nullptr);
        tables = insights(corpus, std::span<const std::size_t>(topic_of));
    }
    print_crosstab(tables.by_priority);
    print_crosstab(tables.by_issue_type);
    print_crosstab(tables.by_component);
    if (tables.by_topic) {
        print_crosstab(*tables.by_topic);
    }
    if (!a.out_csv.empty()) {
        for (const auto& p : write_insight_csvs(tables, a.out_csv)) {
            fmt::print("wrote {}\n", p.string());
        }
    }
    if (!a.out_json.empty()) {
        write_text(a.out_json, insights_to_json(tables).dump(2) + "\n");
    }
    return 0;
}

struct ServeArgs {
    std::string bundles;
    std::string addr = "127.0.0.1:8080";
    std::string cors = "*";
};

int cmd_serve(const ServeArgs& a) {
    auto server = parse_address(a.addr);
    server.cors_origin = a.cors;
    const auto service = Service::from_directory(a.bundles);
    fmt::print("serving {} project(s) from {} on {}:{}\n", service.projects().size(), a.bundles, server.host,
               server.port);
    std::fflush(stdout);
    run_server(service, server);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resolution-time category prediction for issue trackers"};
    app.require_subcommand(1);
    std::function<int()> run;

    InitConfigArgs init_args;
    auto* init = app.add_subcommand("init-config", "Print or write the default project configuration");
    init->add_option("--out", init_args.out, "Output path (stdout when omitted)");
    init->callback([&] { run = [&] { return cmd_init_config(init_args); }; });

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "Parse, filter and label an issue dump into a corpus");
    ingest->add_option("--dump", ingest_args.dump, "JSONL issue dump")->required();
    ingest->add_option("--config", ingest_args.config, "Project configuration");
    ingest->add_option("--out", ingest_args.out, "Corpus output path")->required();
    ingest->add_option("--report", ingest_args.report, "Write the rejection report as JSON");
    ingest->add_option("--project", ingest_args.project, "Keep only this project's records");
    ingest->add_flag("--strict-parse", ingest_args.strict, "Abort on the first malformed line");
    ingest->callback([&] { run = [&] { return cmd_ingest(ingest_args); }; });

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Fit the stacked model on a corpus and write a bundle");
    train->add_option("--corpus", train_args.corpus, "Corpus file")->required();
    train->add_option("--config", train_args.config, "Project configuration");
    train->add_option("--out", train_args.out, "Bundle output path")->required();
    train->callback([&] { run = [&] { return cmd_train(train_args); }; });

    EvaluateArgs eval_args;
    auto* evaluate = app.add_subcommand("evaluate", "Held-out evaluation over one or more seeds");
    evaluate->add_option("--corpus", eval_args.corpus, "Corpus file")->required();
    evaluate->add_option("--config", eval_args.config, "Project configuration");
    evaluate->add_option("--seeds", eval_args.seeds, "Number of seeds")->check(CLI::PositiveNumber);
    evaluate->add_option("--out-json", eval_args.out_json, "Write the report as JSON");
    evaluate->add_option("--out-csv", eval_args.out_csv, "Write per-seed metrics as CSV");
    evaluate->callback([&] { run = [&] { return cmd_evaluate(eval_args); }; });

    PredictArgs predict_args;
    auto* predict_cmd = app.add_subcommand("predict", "Predict the resolution category of one issue");
    predict_cmd->add_option("--bundle", predict_args.bundle, "Model bundle")->required();
    predict_cmd->add_option("--issue", predict_args.issue, "Issue JSON file")->required();
    predict_cmd->add_flag("--explain", predict_args.explain, "Print per-view narratives");
    predict_cmd->add_flag("--json", predict_args.json, "Print JSON instead of text");
    predict_cmd->callback([&] { run = [&] { return cmd_predict(predict_args); }; });

    TopicsArgs topics_args;
    auto* topics_cmd = app.add_subcommand("topics", "List the topics of a bundle");
    topics_cmd->add_option("--bundle", topics_args.bundle, "Model bundle")->required();
    topics_cmd->add_flag("--json", topics_args.json, "Print JSON instead of text");
    topics_cmd->callback([&] { run = [&] { return cmd_topics(topics_args); }; });

    InsightsArgs insights_args;
    auto* insights_cmd = app.add_subcommand("insights", "Category distributions per priority, type and component");
    insights_cmd->add_option("--corpus", insights_args.corpus, "Corpus file")->required();
    insights_cmd->add_option("--bundle", insights_args.bundle, "Add a per-topic table using this bundle");
    insights_cmd->add_option("--out-csv", insights_args.out_csv, "Directory for CSV tables");
    insights_cmd->add_option("--out-json", insights_args.out_json, "Write the tables as JSON");
    insights_cmd->callback([&] { run = [&] { return cmd_insights(insights_args); }; });

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "Serve bundles over HTTP");
    serve->add_option("--bundles", serve_args.bundles, "Bundle directory")->envname("FIXTIME_BUNDLES")->required();
    serve->add_option("--addr", serve_args.addr, "host:port")->envname("FIXTIME_ADDR");
    serve->add_option("--cors-origin", serve_args.cors, "Access-Control-Allow-Origin value, empty to disable");
    serve->callback([&] { run = [&] { return cmd_serve(serve_args); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        return run();
    } catch (const CorpusEmpty& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitCorpusEmpty;
    } catch (const ParseError& e) {
        fmt::print(stderr, "error: parse aborted at {}\n", e.what());
        return kExitError;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitError;
    }
}
