#pragma once

// Ground-truth generators: linear acyclic structural equation data and
// labeled keyword corpora.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "ewom/corpus.hpp"
#include "ewom/error.hpp"
#include "ewom/observation.hpp"
#include "ewom/random.hpp"

namespace ewom {

enum class NoiseKind { uniform, laplace, gaussian };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::uniform;
    double scale = 1.0;  // standard deviation
};

struct StructuralSpec {
    std::vector<std::string> names;
    Eigen::MatrixXd B0;  // B0(i, j): strength of x_j -> x_i
    std::vector<NoiseSpec> noise;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
};

struct SemSample {
    ObservationMatrix observations;
    Eigen::MatrixXd B0;
};

inline NoiseKind parse_noise_kind(const std::string& s) {
    if (s == "uniform") return NoiseKind::uniform;
    if (s == "laplace") return NoiseKind::laplace;
    if (s == "gaussian") return NoiseKind::gaussian;
    throw ContractError("unknown noise distribution '" + s + "'");
}

/// Topological order of the graph j -> i for B(i, j) != 0; throws if B has a cycle or self-loop.
inline std::vector<int> topological_order(const Eigen::MatrixXd& B) {
    const Eigen::Index d = B.rows();
    if (B.cols() != d) throw ContractError("B0 must be square");
    std::vector<int> indegree(static_cast<std::size_t>(d), 0);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (B(i, i) != 0.0) throw ContractError("B0 has a nonzero diagonal entry");
        for (Eigen::Index j = 0; j < d; ++j) indegree[static_cast<std::size_t>(i)] += B(i, j) != 0.0;
    }
    std::vector<int> order;
    std::vector<char> done(static_cast<std::size_t>(d), 0);
    while (static_cast<Eigen::Index>(order.size()) < d) {
        Eigen::Index next = -1;
        for (Eigen::Index i = 0; i < d; ++i)
            if (!done[static_cast<std::size_t>(i)] && indegree[static_cast<std::size_t>(i)] == 0) {
                next = i;
                break;
            }
        if (next < 0) throw ContractError("B0 is not permutable to strictly lower-triangular form");
        done[static_cast<std::size_t>(next)] = 1;
        order.push_back(static_cast<int>(next));
        for (Eigen::Index i = 0; i < d; ++i)
            if (B(i, next) != 0.0) --indegree[static_cast<std::size_t>(i)];
    }
    return order;
}

inline double draw_noise(rnd::Engine& g, const NoiseSpec& s) {
    switch (s.kind) {
        case NoiseKind::uniform: return rnd::uniform_sd(g, s.scale);
        case NoiseKind::laplace: return rnd::laplace_sd(g, s.scale);
        case NoiseKind::gaussian: return rnd::standard_normal(g) * s.scale;
    }
    return 0.0;
}

/// Draws e and solves x = B0 x + e by substitution in causal order.
inline SemSample generate_sem(const StructuralSpec& spec) {
    const auto d = static_cast<Eigen::Index>(spec.names.size());
    if (d == 0) throw ContractError("structural spec has no variables");
    if (spec.B0.rows() != d || spec.B0.cols() != d) throw ContractError("B0 shape does not match variable count");
    if (spec.noise.size() != static_cast<std::size_t>(d)) throw ContractError("need one noise spec per variable");
    for (const auto& ns : spec.noise)
        if (!(ns.scale > 0.0)) throw ContractError("noise scales must be > 0");
    if (spec.n == 0) throw ContractError("sample count must be positive");
    const auto order = topological_order(spec.B0);

    const auto n = static_cast<Eigen::Index>(spec.n);
    rnd::Engine g(spec.seed);
    Eigen::MatrixXd E(d, n);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index t = 0; t < n; ++t) E(i, t) = draw_noise(g, spec.noise[static_cast<std::size_t>(i)]);

    Eigen::MatrixXd X = E;
    for (int i : order)
        for (Eigen::Index j = 0; j < d; ++j)
            if (spec.B0(i, j) != 0.0) X.row(i) += spec.B0(i, j) * X.row(j);

    SemSample out;
    out.B0 = spec.B0;
    out.observations.columns = spec.names;
    out.observations.values = X.transpose();
    char buf[32];
    for (Eigen::Index t = 0; t < n; ++t) {
        std::snprintf(buf, sizeof buf, "s%05ld", static_cast<long>(t + 1));
        out.observations.station_ids.emplace_back(buf);
    }
    return out;
}

/// x2 = b * x1 + e2.
inline StructuralSpec chain_spec(double b, std::size_t n, std::uint64_t seed, NoiseKind noise = NoiseKind::uniform) {
    StructuralSpec s;
    s.names = {"x1", "x2"};
    s.B0 = Eigen::MatrixXd::Zero(2, 2);
    s.B0(1, 0) = b;
    s.noise.assign(2, NoiseSpec{noise, 1.0});
    s.n = n;
    s.seed = seed;
    return s;
}

/// Every x_i feeds y with the given strength; x_i are mutually independent.
inline StructuralSpec star_spec(const std::vector<double>& strengths, std::size_t n, std::uint64_t seed,
                                NoiseKind noise = NoiseKind::uniform) {
    const auto k = static_cast<Eigen::Index>(strengths.size());
    StructuralSpec s;
    for (Eigen::Index i = 0; i < k; ++i) s.names.push_back("x" + std::to_string(i + 1));
    s.names.push_back("y");
    s.B0 = Eigen::MatrixXd::Zero(k + 1, k + 1);
    for (Eigen::Index i = 0; i < k; ++i) s.B0(k, i) = strengths[static_cast<std::size_t>(i)];
    s.noise.assign(static_cast<std::size_t>(k + 1), NoiseSpec{noise, 1.0});
    s.n = n;
    s.seed = seed;
    return s;
}

// ---------------------------------------------------------------------------
// Corpora

struct TopicVocabulary {
    TopicId id;
    std::string name;
    std::vector<std::string> exclusive;
};

struct CorpusSpec {
    std::vector<TopicVocabulary> topics;
    std::vector<std::string> shared;
    std::size_t docs_per_topic = 10;
    std::size_t tokens_per_doc = 8;
    double noise_rate = 0.0;
    double multi_label_rate = 0.0;
    /// When > 0, documents are spread uniformly over this many station ids.
    std::size_t stations = 0;
    std::uint64_t seed = 0;
};

/// Topics T1..Tk with words "t<i>w<j>" and shared words "common<j>".
inline CorpusSpec default_corpus_spec(std::size_t topics, std::size_t words_per_topic, std::size_t shared_words) {
    CorpusSpec s;
    const auto catalog = default_topic_catalog();
    for (std::size_t t = 0; t < topics; ++t) {
        TopicVocabulary tv;
        tv.id = "T" + std::to_string(t + 1);
        tv.name = t < catalog.size() ? catalog[t].name : tv.id;
        for (std::size_t w = 0; w < words_per_topic; ++w)
            tv.exclusive.push_back("t" + std::to_string(t + 1) + "w" + std::to_string(w));
        s.topics.push_back(std::move(tv));
    }
    for (std::size_t w = 0; w < shared_words; ++w) s.shared.push_back("common" + std::to_string(w));
    return s;
}

inline LabeledCorpus generate_corpus(const CorpusSpec& spec) {
    if (spec.topics.empty()) throw ContractError("corpus spec has no topics");
    if (!(spec.noise_rate >= 0.0 && spec.noise_rate <= 1.0)) throw ContractError("noise_rate must lie in [0, 1]");
    if (!(spec.multi_label_rate >= 0.0 && spec.multi_label_rate <= 1.0))
        throw ContractError("multi_label_rate must lie in [0, 1]");
    if (spec.tokens_per_doc == 0) throw ContractError("tokens_per_doc must be positive");
    std::set<std::string> seen;
    for (const auto& t : spec.topics) {
        if (t.exclusive.empty()) throw ContractError("topic '" + t.id + "' has an empty vocabulary");
        for (const auto& w : t.exclusive)
            if (!seen.insert(w).second) throw ContractError("word '" + w + "' is not exclusive to one topic");
    }
    if (spec.noise_rate > 0.0 && spec.shared.empty()) throw ContractError("noise_rate > 0 needs shared words");

    rnd::Engine g(spec.seed);
    std::vector<Document> docs;
    std::map<std::string, std::set<TopicId>> labels;
    std::vector<Topic> catalog;
    for (const auto& t : spec.topics) catalog.push_back({t.id, t.name});

    const std::size_t k = spec.topics.size();
    char buf[64];
    for (std::size_t ti = 0; ti < k; ++ti) {
        const auto& topic = spec.topics[ti];
        for (std::size_t j = 0; j < spec.docs_per_topic; ++j) {
            Document d;
            std::snprintf(buf, sizeof buf, "%s-%04zu", topic.id.c_str(), j + 1);
            d.id = buf;
            d.author = "user" + std::to_string(rnd::index(g, 500));
            if (spec.stations > 0) {
                std::snprintf(buf, sizeof buf, "S%03zu", rnd::index(g, spec.stations) + 1);
                d.station_id = buf;
            }
            const TopicVocabulary* second = nullptr;
            if (k > 1 && rnd::uniform01(g) < spec.multi_label_rate) {
                std::size_t u = rnd::index(g, k - 1);
                if (u >= ti) ++u;
                second = &spec.topics[u];
            }
            for (std::size_t w = 0; w < spec.tokens_per_doc; ++w) {
                if (rnd::uniform01(g) < spec.noise_rate) {
                    d.tokens.push_back(spec.shared[rnd::index(g, spec.shared.size())]);
                } else {
                    const auto& src = second && rnd::uniform01(g) < 0.5 ? *second : topic;
                    d.tokens.push_back(src.exclusive[rnd::index(g, src.exclusive.size())]);
                }
            }
            for (const auto& tok : d.tokens) d.text += (d.text.empty() ? "" : " ") + tok;
            labels[d.id].insert(topic.id);
            if (second) labels[d.id].insert(second->id);
            docs.push_back(std::move(d));
        }
    }
    return LabeledCorpus(std::move(docs), std::move(labels), std::move(catalog));
}

// ---------------------------------------------------------------------------
// Spec files (JSON)

inline StructuralSpec structural_spec_from_json(const nlohmann::json& j) {
    StructuralSpec s;
    try {
        const auto& b = j.at("B0");
        const auto d = static_cast<Eigen::Index>(b.size());
        s.B0.resize(d, d);
        for (Eigen::Index i = 0; i < d; ++i) {
            if (static_cast<Eigen::Index>(b[static_cast<std::size_t>(i)].size()) != d)
                throw ContractError("B0 must be square");
            for (Eigen::Index k = 0; k < d; ++k)
                s.B0(i, k) = b[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
        }
        if (j.contains("names")) {
            s.names = j.at("names").get<std::vector<std::string>>();
        } else {
            for (Eigen::Index i = 0; i < d; ++i) s.names.push_back("x" + std::to_string(i + 1));
        }
        const double scale = j.value("scale", 1.0);
        const auto& noise = j.contains("noise") ? j.at("noise") : nlohmann::json("uniform");
        if (noise.is_string()) {
            s.noise.assign(static_cast<std::size_t>(d), NoiseSpec{parse_noise_kind(noise.get<std::string>()), scale});
        } else {
            for (const auto& e : noise)
                s.noise.push_back({parse_noise_kind(e.at("dist").get<std::string>()), e.value("scale", scale)});
        }
        s.n = j.value("n", std::size_t{1000});
        s.seed = j.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("invalid structural spec: ") + e.what());
    }
    return s;
}

inline CorpusSpec corpus_spec_from_json(const nlohmann::json& j) {
    CorpusSpec s;
    try {
        const auto& topics = j.at("topics");
        if (topics.is_number_integer()) {
            s = default_corpus_spec(topics.get<std::size_t>(), j.value("words_per_topic", std::size_t{6}),
                                    j.value("shared_words", std::size_t{20}));
        } else {
            for (const auto& t : topics)
                s.topics.push_back({t.at("id").get<std::string>(), t.value("name", t.at("id").get<std::string>()),
                                    t.at("words").get<std::vector<std::string>>()});
            s.shared = j.value("shared", std::vector<std::string>{});
        }
        s.docs_per_topic = j.value("docs_per_topic", s.docs_per_topic);
        s.tokens_per_doc = j.value("tokens_per_doc", s.tokens_per_doc);
        s.noise_rate = j.value("noise_rate", s.noise_rate);
        s.multi_label_rate = j.value("multi_label_rate", s.multi_label_rate);
        s.stations = j.value("stations", s.stations);
        s.seed = j.value("seed", s.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("invalid corpus spec: ") + e.what());
    }
    return s;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ContractError(path.string() + ": " + e.what());
    }
}

}  // namespace ewom
