#pragma once

// Subcommand implementations behind the `ewom` binary. Each command reads its
// inputs from files, writes its outputs into `out_dir`, and logs a short
// summary. Failures are thrown; the binary maps ContractError to exit code 2
// and other errors to exit code 1.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ewom/causal_lingam.hpp"
#include "ewom/corpus.hpp"
#include "ewom/csv.hpp"
#include "ewom/entropy_keywords.hpp"
#include "ewom/error.hpp"
#include "ewom/linear_classifier.hpp"
#include "ewom/observation.hpp"
#include "ewom/synthgen.hpp"
#include "ewom/topic_pipeline.hpp"

namespace ewom::cli {

namespace fs = std::filesystem;

struct RunConfig {
    fs::path docs;
    fs::path labels;
    fs::path keywords_dir;
    fs::path models_dir;
    fs::path sales;
    fs::path official;
    fs::path matrix;
    fs::path spec;
    fs::path metrics;
    fs::path report;
    fs::path stop_words;
    fs::path out_dir = ".";
    std::string segmenter_command;

    double alpha = 2.0;
    double alpha_neg = 2.0;
    std::string keyword_mode = "cross";

    Hyper hyper;
    int k = 5;

    std::vector<std::string> checkin_patterns{"I'm at"};

    std::string target = "y";
    double tol = 1e-4;
    int max_iter = 1000;
    std::string nonlinearity = "tanh";
    double prune_threshold = 0.0;

    std::optional<std::uint64_t> seed;

    std::uint64_t seed_or_default() const { return seed.value_or(0); }
};

/// Parses `C=1,tol=1e-4,k=5,max_iter=1000` into the config; unknown keys are errors.
inline void parse_hyper(const std::string& text, RunConfig& cfg) {
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ContractError("--hyper entry '" + item + "' is not key=value");
        const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        const double v = csv::parse_double(val, "--hyper " + key);
        if (key == "C")
            cfg.hyper.C = v;
        else if (key == "tol")
            cfg.hyper.tol = v;
        else if (key == "max_iter")
            cfg.hyper.max_iter = static_cast<int>(v);
        else if (key == "k")
            cfg.k = static_cast<int>(v);
        else
            throw ContractError("unknown --hyper key '" + key + "'");
    }
}

namespace detail {

inline void require_file(const fs::path& p, const std::string& what) {
    if (p.empty()) throw ContractError("missing " + what + " path");
    if (!fs::is_regular_file(p)) throw ContractError(what + " not found: " + p.string());
}

inline SegmenterSpec segmenter(const RunConfig& cfg) {
    SegmenterSpec spec = cfg.segmenter_command.empty() ? SegmenterSpec{} : SegmenterSpec::external(cfg.segmenter_command);
    if (!cfg.stop_words.empty()) {
        spec.self_sufficient_only = true;
        spec.stop_words = load_stop_words(cfg.stop_words);
    }
    return spec;
}

inline std::vector<Document> load_segmented(const RunConfig& cfg) {
    require_file(cfg.docs, "documents file");
    return segment_all(load_documents(cfg.docs, format_from_extension(cfg.docs)), segmenter(cfg));
}

inline LabeledCorpus load_labeled(const RunConfig& cfg) {
    auto docs = load_segmented(cfg);
    require_file(cfg.labels, "label file");
    return attach_labels(std::move(docs), cfg.labels);
}

inline KeywordMap load_keyword_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ContractError("keyword directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.rfind("keywords_", 0) == 0 && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    KeywordMap out;
    for (const auto& f : files)
        for (auto& [topic, set] : load_keywords(f)) out[topic].keywords.insert(set.keywords.begin(), set.keywords.end());
    for (auto& [topic, set] : out) set.topic = topic;
    return out;
}

inline std::string topic_name(const TopicId& id) {
    for (const auto& t : default_topic_catalog())
        if (t.id == id) return t.name;
    return id;
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// One keywords_<topic>.csv per topic that has labeled documents.
inline int cmd_keywords(const RunConfig& cfg, std::ostream& log) {
    const auto corpus = detail::load_labeled(cfg);
    KeywordConfig kc;
    kc.alpha = cfg.alpha;
    kc.alpha_neg = cfg.alpha_neg;
    if (cfg.keyword_mode == "cross")
        kc.mode = KeywordConfig::Mode::cross_category;
    else if (cfg.keyword_mode == "binary")
        kc.mode = KeywordConfig::Mode::binary;
    else
        throw ContractError("unknown keyword mode '" + cfg.keyword_mode + "'");
    kc.validate();

    const auto keywords = extract_keywords(corpus, kc);
    fs::create_directories(cfg.out_dir);
    log << "keywords:";
    for (const auto& [topic, set] : keywords) {
        save_keywords(set, cfg.out_dir / ("keywords_" + topic + ".csv"));
        log << ' ' << topic << '=' << set.keywords.size();
    }
    log << '\n';
    return 0;
}

inline int cmd_train_eval(const RunConfig& cfg, std::ostream& log) {
    const auto corpus = detail::load_labeled(cfg);
    const auto keywords = detail::load_keyword_dir(cfg.keywords_dir);
    const auto space = FeatureSpace::from_keywords(keywords);
    const auto features = featurize_all(corpus.documents(), space);

    fs::create_directories(cfg.out_dir);
    save_feature_space(space, cfg.out_dir / "features.csv");
    csv::Writer metrics(cfg.out_dir / "metrics.csv");
    metrics.row({"topic_id", "precision", "recall", "f1"});
    std::size_t trained = 0;
    for (const auto& t : corpus.catalog()) {
        if (corpus.partition_size(t.id) == 0) continue;
        const auto y = binary_labels(corpus, t.id);
        try {
            const auto m = kfold_evaluate(features, y, cfg.k, cfg.hyper, cfg.seed_or_default());
            const auto model = train(features, y, cfg.hyper, cfg.seed_or_default());
            save_model(model, cfg.out_dir / ("model_" + t.id + ".csv"));
            metrics.row({t.id, csv::format_double(m.precision), csv::format_double(m.recall), csv::format_double(m.f1)});
            log << t.id << ": precision=" << m.precision << " recall=" << m.recall << " f1=" << m.f1 << '\n';
            ++trained;
        } catch (const Error& e) {
            metrics.row({t.id, "NA", "NA", "NA"});
            log << t.id << ": error: " << e.what() << '\n';
        }
    }
    if (trained == 0) throw ContractError("no topic could be trained");
    return 0;
}

inline int cmd_classify_aggregate(const RunConfig& cfg, std::ostream& log) {
    const auto docs = detail::load_segmented(cfg);
    if (!fs::is_directory(cfg.models_dir)) throw ContractError("model directory not found: " + cfg.models_dir.string());
    detail::require_file(cfg.sales, "sales file");

    PipelineConfig pc;
    pc.checkin_patterns = cfg.checkin_patterns;
    if (!cfg.official.empty()) {
        detail::require_file(cfg.official, "official accounts file");
        pc.official_accounts = load_official_accounts(cfg.official);
    }
    const auto space = load_feature_space(cfg.models_dir / "features.csv");
    for (const auto& t : pc.stage2_topics) {
        pc.models[t] = load_model(cfg.models_dir / ("model_" + t + ".csv"));
        pc.spaces[t] = space;
    }
    for (const auto& t : pc.stage3_topics) {
        pc.models[t] = load_model(cfg.models_dir / ("model_" + t + ".csv"));
        pc.spaces[t] = space;
    }
    if (const auto mpath = cfg.models_dir / "metrics.csv"; fs::exists(mpath)) {
        std::map<TopicId, double> f1s;
        for (const auto& row : csv::read_with_header(mpath, {"topic_id", "precision", "recall", "f1"}))
            if (row.fields[3] != "NA") f1s[row.fields[0]] = csv::parse_double(row.fields[3], mpath.string());
        pc.stage3_topics = order_by_f1(pc.stage3_topics, f1s);
    }

    const auto assignments = classify_corpus(docs, pc);
    const auto result = aggregate(assignments, docs, load_sales(cfg.sales));

    fs::create_directories(cfg.out_dir);
    save_assignments(assignments, cfg.out_dir / "assignments.csv");
    save_observations(result.matrix, cfg.out_dir / "observations.csv");
    std::ofstream drop(cfg.out_dir / "drop_report.txt", std::ios::binary);
    drop << "dropped " << result.dropped.size() << " documents without station_id\n";
    for (const auto& id : result.dropped) drop << id << '\n';
    log << "classified " << assignments.size() << " documents; " << result.matrix.rows() << " stations; dropped "
        << result.dropped.size() << '\n';
    return 0;
}

inline int cmd_causal(const RunConfig& cfg, std::ostream& log) {
    detail::require_file(cfg.matrix, "observation matrix");
    const auto obs = load_observations(cfg.matrix);
    if (obs.column_index(cfg.target) < 0) throw ContractError("target column '" + cfg.target + "' not in matrix");

    fs::create_directories(cfg.out_dir);
    const auto report = check_assumptions(obs);
    const auto diag_path = cfg.out_dir / "diagnostics.txt";
    {
        std::ofstream diag(diag_path, std::ios::binary);
        diag << format_assumption_report(report);
    }
    if (report.gaussian_warning) log << "WARNING: data look Gaussian; causal directions are not identifiable\n";

    LingamConfig lc;
    lc.ica.tol = cfg.tol;
    lc.ica.max_iter = cfg.max_iter;
    lc.ica.seed = cfg.seed_or_default();
    if (cfg.nonlinearity == "tanh")
        lc.ica.nonlinearity = Nonlinearity::tanh;
    else if (cfg.nonlinearity == "cube")
        lc.ica.nonlinearity = Nonlinearity::cube;
    else
        throw ContractError("unknown nonlinearity '" + cfg.nonlinearity + "'");
    lc.prune_threshold = cfg.prune_threshold;

    CausalModel model;
    try {
        model = fit(obs, lc);
    } catch (const Error& e) {
        std::ofstream diag(diag_path, std::ios::binary | std::ios::app);
        diag << "fit failed: " << e.what() << '\n';
        log << format_assumption_report(report);
        throw;
    }

    {
        std::ofstream diag(diag_path, std::ios::binary | std::ios::app);
        diag << "ica iterations: " << model.ica_iterations << '\n';
        diag << "causal order:";
        for (int i : model.order) diag << ' ' << model.names[static_cast<std::size_t>(i)];
        diag << "\norder residual: " << csv::format_double(model.order_residual) << '\n';
    }
    save_matrix(model.B, model.names, cfg.out_dir / "B.csv");
    const auto effects = target_effects(model, cfg.target);
    csv::Writer w(cfg.out_dir / "report.csv");
    w.row({"variable", "connection_strength", "direction"});
    for (const auto& e : effects.entries)
        w.row({e.variable, csv::format_double(e.strength), direction_label(e, effects.target)});
    log << "fitted " << model.names.size() << " variables on " << obs.rows() << " rows\n";
    return 0;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    detail::require_file(cfg.spec, "spec file");
    const auto j = read_json_file(cfg.spec);
    const std::string kind = j.value("kind", "");
    fs::create_directories(cfg.out_dir);
    if (kind == "sem") {
        auto spec = structural_spec_from_json(j);
        if (cfg.seed) spec.seed = *cfg.seed;
        const auto sample = generate_sem(spec);
        save_observations(sample.observations, cfg.out_dir / "observations.csv");
        save_matrix(sample.B0, spec.names, cfg.out_dir / "truth_B.csv");
        log << "wrote " << spec.n << " rows of " << spec.names.size() << " variables\n";
    } else if (kind == "corpus") {
        auto spec = corpus_spec_from_json(j);
        if (cfg.seed) spec.seed = *cfg.seed;
        const auto corpus = generate_corpus(spec);
        save_documents(corpus.documents(), cfg.out_dir / "documents.jsonl");
        save_labels(corpus, cfg.out_dir / "labels.csv");
        KeywordMap truth;
        for (const auto& t : spec.topics) truth[t.id] = {t.id, {t.exclusive.begin(), t.exclusive.end()}};
        save_keywords(truth, cfg.out_dir / "truth_keywords.csv");
        log << "wrote " << corpus.documents().size() << " documents\n";
    } else {
        throw ContractError("spec 'kind' must be \"sem\" or \"corpus\"");
    }
    return 0;
}

/// Plain-text tables from a metrics CSV and/or a causal report CSV.
inline int cmd_report(const RunConfig& cfg, std::ostream& out) {
    if (cfg.metrics.empty() && cfg.report.empty()) throw ContractError("report needs --metrics and/or --report");
    if (!cfg.metrics.empty()) {
        detail::require_file(cfg.metrics, "metrics file");
        out << std::left << std::setw(8) << "Topic" << std::setw(24) << "Content" << "F1\n";
        for (const auto& row : csv::read_with_header(cfg.metrics, {"topic_id", "precision", "recall", "f1"}))
            out << std::setw(8) << row.fields[0] << std::setw(24) << detail::topic_name(row.fields[0]) << row.fields[3]
                << '\n';
    }
    if (!cfg.report.empty()) {
        detail::require_file(cfg.report, "causal report");
        if (!cfg.metrics.empty()) out << '\n';
        out << std::left << std::setw(10) << "Variable" << std::setw(24) << "Content" << std::setw(22)
            << "Connection strength" << "Direction\n";
        for (const auto& row : csv::read_with_header(cfg.report, {"variable", "connection_strength", "direction"})) {
            std::string content;
            // x<k> columns follow the catalog order T1..T7
            if (row.fields[0].size() > 1 && row.fields[0][0] == 'x')
                content = detail::topic_name("T" + row.fields[0].substr(1));
            out << std::setw(10) << row.fields[0] << std::setw(24) << content << std::setw(22) << row.fields[1]
                << row.fields[2] << '\n';
        }
    }
    return 0;
}

}  // namespace ewom::cli
