// ewom: tweet topic classification and LiNGAM causal analysis from the command line.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ewom/commands.hpp"

namespace {

using ewom::cli::RunConfig;

void add_segmenter_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--segmenter", cfg.segmenter_command,
                    "External segmenter command; {input} is replaced by a file holding the text");
    cmd->add_option("--stop-words", cfg.stop_words, "Stop-word list, one word per line");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy keyword topic classification and LiNGAM causal analysis"};
    app.set_config("--config", "", "Read options from a TOML/INI file ([subcommand] sections)");
    app.require_subcommand(1);

    RunConfig cfg;
    std::uint64_t seed = 0;
    std::string hyper;

    auto* keywords = app.add_subcommand("keywords", "Extract per-topic keywords from a labeled corpus");
    keywords->add_option("--docs", cfg.docs, "Documents (.jsonl or .csv)")->required();
    keywords->add_option("--labels", cfg.labels, "Label CSV doc_id,topic_id")->required();
    keywords->add_option("--alpha", cfg.alpha, "Entropy ratio threshold (> 1)")->capture_default_str();
    keywords->add_option("--alpha-neg", cfg.alpha_neg, "Negative-keyword ratio threshold (> 1)")->capture_default_str();
    keywords->add_option("--mode", cfg.keyword_mode, "cross or binary")->capture_default_str();
    keywords->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    add_segmenter_options(keywords, cfg);

    auto* train = app.add_subcommand("train", "Train per-topic classifiers and report k-fold metrics");
    train->add_option("--docs", cfg.docs, "Documents (.jsonl or .csv)")->required();
    train->add_option("--labels", cfg.labels, "Label CSV doc_id,topic_id")->required();
    train->add_option("--keywords", cfg.keywords_dir, "Directory of keywords_<topic>.csv files")->required();
    train->add_option("--hyper", hyper, "C=...,tol=...,k=...,max_iter=...");
    train->add_option("--seed", seed, "Random seed");
    train->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    add_segmenter_options(train, cfg);

    auto* classify = app.add_subcommand("classify", "Route documents through the topic hierarchy and aggregate by station");
    classify->add_option("--docs", cfg.docs, "Documents (.jsonl or .csv)")->required();
    classify->add_option("--models", cfg.models_dir, "Directory written by `train`")->required();
    classify->add_option("--sales", cfg.sales, "Sales CSV station_id,sales")->required();
    classify->add_option("--official", cfg.official, "Official accounts, one per line");
    classify->add_option("--checkin", cfg.checkin_patterns, "Check-in phrase (repeatable)")->capture_default_str();
    classify->add_option("--seed", seed, "Random seed (unused; accepted for uniform invocation)");
    classify->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    add_segmenter_options(classify, cfg);

    auto* causal = app.add_subcommand("causal", "Estimate the LiNGAM connection strengths");
    causal->add_option("--matrix", cfg.matrix, "Observation CSV station_id,x1,...,y")->required();
    causal->add_option("--target", cfg.target, "Target column")->capture_default_str();
    causal->add_option("--seed", seed, "ICA seed");
    causal->add_option("--tol", cfg.tol, "ICA convergence tolerance")->capture_default_str();
    causal->add_option("--max-iter", cfg.max_iter, "ICA iteration limit")->capture_default_str();
    causal->add_option("--nonlinearity", cfg.nonlinearity, "tanh or cube")->capture_default_str();
    causal->add_option("--prune", cfg.prune_threshold, "Zero |b_ij| below this (0 = off)")->capture_default_str();
    causal->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic corpus or structural-equation dataset");
    simulate->add_option("--spec", cfg.spec, "JSON spec with \"kind\": \"sem\" or \"corpus\"")->required();
    simulate->add_option("--seed", seed, "Overrides the seed given in the --spec file");
    simulate->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();

    auto* report = app.add_subcommand("report", "Print metrics and causal reports as tables");
    report->add_option("--metrics", cfg.metrics, "metrics.csv from `train`");
    report->add_option("--report", cfg.report, "report.csv from `causal`");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        for (auto* sub : {train, classify, causal, simulate})
            if (sub->parsed() && sub->count("--seed")) cfg.seed = seed;
        if (!hyper.empty()) ewom::cli::parse_hyper(hyper, cfg);

        if (keywords->parsed()) return ewom::cli::cmd_keywords(cfg, std::cout);
        if (train->parsed()) return ewom::cli::cmd_train_eval(cfg, std::cout);
        if (classify->parsed()) return ewom::cli::cmd_classify_aggregate(cfg, std::cout);
        if (causal->parsed()) return ewom::cli::cmd_causal(cfg, std::cout);
        if (simulate->parsed()) return ewom::cli::cmd_simulate(cfg, std::cout);
        if (report->parsed()) return ewom::cli::cmd_report(cfg, std::cout);
    } catch (const ewom::ContractError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
