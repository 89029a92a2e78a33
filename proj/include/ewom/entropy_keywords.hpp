#pragma once

// Entropy-based keyword extraction.
//
// For a word j and a document partition of size M, let N_ij be the number of
// times j occurs in document i. The word's occurrence distribution over the
// partition is P_ij = N_ij / sum_i N_ij and its entropy H_j = -sum_i P_ij log2 P_ij
// (0 log 0 taken as 0). Words spread across many documents of a partition have
// high entropy; a word confined to one document has H = 0.
//
// A word is a keyword of a topic when its entropy over the topic's documents
// exceeds alpha times its entropy elsewhere, either against the complement
// partition (binary mode) or against every other topic's partition
// (cross-category mode).

#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ewom/corpus.hpp"
#include "ewom/csv.hpp"
#include "ewom/error.hpp"

namespace ewom {

using WordVectors = std::map<std::string, std::vector<double>>;

struct CountMatrix {
    TopicId category;
    std::vector<std::string> positive_ids;
    std::vector<std::string> negative_ids;
    WordVectors positive;  // word -> N_ijP, one entry per positive document
    WordVectors negative;  // word -> N_ijN, one entry per negative document
};

struct ProbabilityTable {
    WordVectors positive;
    WordVectors negative;
};

struct EntropyTable {
    std::map<std::string, double> positive;  // H_Pj in bits
    std::map<std::string, double> negative;  // H_Nj in bits
};

struct KeywordConfig {
    enum class Mode { binary, cross_category };

    double alpha = 2.0;
    double alpha_neg = 2.0;
    Mode mode = Mode::cross_category;

    void validate() const {
        if (!(alpha > 1.0)) throw ContractError("alpha must be > 1");
        if (!(alpha_neg > 1.0)) throw ContractError("alpha_neg must be > 1");
    }
};

struct KeywordSet {
    TopicId topic;
    std::set<std::string> keywords;

    bool operator==(const KeywordSet&) const = default;
};

using KeywordMap = std::map<TopicId, KeywordSet>;

/// Raw token frequencies per document, split by whether the document carries `topic`.
inline CountMatrix count_occurrences(const LabeledCorpus& corpus, const TopicId& topic) {
    if (!corpus.in_catalog(topic)) throw ContractError("topic '" + topic + "' is not in the catalog");
    CountMatrix cm;
    cm.category = topic;
    std::vector<const Document*> pos, neg;
    for (const auto& d : corpus.documents()) {
        if (corpus.has_label(d.id, topic)) {
            pos.push_back(&d);
            cm.positive_ids.push_back(d.id);
        } else {
            neg.push_back(&d);
            cm.negative_ids.push_back(d.id);
        }
    }
    if (pos.empty()) throw ContractError("topic '" + topic + "' has no positive documents");

    std::set<std::string> vocabulary;
    for (const auto& d : corpus.documents()) vocabulary.insert(d.tokens.begin(), d.tokens.end());
    for (const auto& w : vocabulary) {
        cm.positive.emplace(w, std::vector<double>(pos.size(), 0.0));
        cm.negative.emplace(w, std::vector<double>(neg.size(), 0.0));
    }
    for (std::size_t i = 0; i < pos.size(); ++i)
        for (const auto& t : pos[i]->tokens) cm.positive[t][i] += 1.0;
    for (std::size_t i = 0; i < neg.size(); ++i)
        for (const auto& t : neg[i]->tokens) cm.negative[t][i] += 1.0;
    return cm;
}

namespace detail {

inline WordVectors normalize_rows(const WordVectors& counts) {
    WordVectors out;
    for (const auto& [word, n] : counts) {
        double total = 0.0;
        for (double v : n) total += v;
        std::vector<double> p(n.size(), 0.0);
        if (total > 0.0)
            for (std::size_t i = 0; i < n.size(); ++i) p[i] = n[i] / total;
        out.emplace(word, std::move(p));
    }
    return out;
}

}  // namespace detail

/// P_ij = N_ij / sum_i N_ij. A word with zero total in a partition gets an all-zero vector.
inline ProbabilityTable word_probabilities(const CountMatrix& counts) {
    return {detail::normalize_rows(counts.positive), detail::normalize_rows(counts.negative)};
}

/// Shannon entropy in bits with 0 log 0 = 0.
inline double shannon_entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log2(v);
    // -0.0 and rounding just below zero for single-support vectors
    return h > 0.0 ? h : 0.0;
}

inline EntropyTable word_entropy(const ProbabilityTable& probs) {
    EntropyTable t;
    for (const auto& [w, p] : probs.positive) t.positive.emplace(w, shannon_entropy(p));
    for (const auto& [w, p] : probs.negative) t.negative.emplace(w, shannon_entropy(p));
    return t;
}

inline EntropyTable entropy_table(const LabeledCorpus& corpus, const TopicId& topic) {
    return word_entropy(word_probabilities(count_occurrences(corpus, topic)));
}

namespace detail {

inline double lookup(const std::map<std::string, double>& m, const std::string& w) {
    auto it = m.find(w);
    return it == m.end() ? 0.0 : it->second;
}

}  // namespace detail

inline KeywordMap select_keywords(const std::map<TopicId, EntropyTable>& entropies, const KeywordConfig& config) {
    config.validate();
    KeywordMap out;
    for (const auto& [topic, _] : entropies) out[topic].topic = topic;

    if (config.mode == KeywordConfig::Mode::binary) {
        for (const auto& [topic, table] : entropies) {
            auto& kw = out[topic].keywords;
            for (const auto& [w, h_pos] : table.positive)
                if (h_pos > config.alpha * detail::lookup(table.negative, w)) kw.insert(w);
        }
        return out;
    }

    if (entropies.size() < 2) throw ContractError("cross-category keyword selection needs at least 2 topics");
    std::set<std::string> universe;
    for (const auto& [_, table] : entropies)
        for (const auto& [w, h] : table.positive) universe.insert(w);

    for (const auto& [topic, table] : entropies) {
        auto& kw = out[topic].keywords;
        for (const auto& w : universe) {
            const double h = detail::lookup(table.positive, w);
            bool wins = true;
            for (const auto& [other, other_table] : entropies) {
                if (other == topic) continue;
                if (!(h > config.alpha * detail::lookup(other_table.positive, w))) {
                    wins = false;
                    break;
                }
            }
            if (wins) kw.insert(w);
        }
    }
    return out;
}

/// Negative keywords: H_Nj > alpha' * H_Pj. Not used by the classification pipeline.
inline KeywordMap select_negative_keywords(const std::map<TopicId, EntropyTable>& entropies,
                                           const KeywordConfig& config) {
    config.validate();
    KeywordMap out;
    for (const auto& [topic, table] : entropies) {
        auto& ks = out[topic];
        ks.topic = topic;
        for (const auto& [w, h_neg] : table.negative)
            if (h_neg > config.alpha_neg * detail::lookup(table.positive, w)) ks.keywords.insert(w);
    }
    return out;
}

/// Entropy tables for every catalog topic that has at least one labeled document.
inline std::map<TopicId, EntropyTable> topic_entropies(const LabeledCorpus& corpus) {
    std::map<TopicId, EntropyTable> out;
    for (const auto& t : corpus.catalog())
        if (corpus.partition_size(t.id) > 0) out.emplace(t.id, entropy_table(corpus, t.id));
    return out;
}

inline KeywordMap extract_keywords(const LabeledCorpus& corpus, const KeywordConfig& config) {
    return select_keywords(topic_entropies(corpus), config);
}

// Serialization: `topic_id,word` with header.

inline void save_keywords(const KeywordSet& set, const std::filesystem::path& path) {
    csv::Writer w(path);
    w.row({"topic_id", "word"});
    for (const auto& k : set.keywords) w.row({set.topic, k});
}

inline void save_keywords(const KeywordMap& sets, const std::filesystem::path& path) {
    csv::Writer w(path);
    w.row({"topic_id", "word"});
    for (const auto& [topic, set] : sets)
        for (const auto& k : set.keywords) w.row({topic, k});
}

inline KeywordMap load_keywords(const std::filesystem::path& path) {
    KeywordMap out;
    for (const auto& row : csv::read_with_header(path, {"topic_id", "word"})) {
        auto& ks = out[row.fields[0]];
        ks.topic = row.fields[0];
        ks.keywords.insert(row.fields[1]);
    }
    return out;
}

}  // namespace ewom
