#pragma once

// Hierarchical multi-label topic routing and per-station aggregation.
//
// Routing order:
//   1  author is an official account      -> {official topic}, stop
//   1b text contains a check-in phrase     -> {check-in topic}, stop
//   2  external-factor classifiers in turn -> first positive, stop
//   3  content classifiers by descending F1 -> every positive
//   no positive anywhere                   -> {fallback topic}

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ewom/corpus.hpp"
#include "ewom/csv.hpp"
#include "ewom/error.hpp"
#include "ewom/linear_classifier.hpp"
#include "ewom/observation.hpp"

namespace ewom {

enum class Stage { official, checkin, external, content, fallback };

inline std::string stage_name(Stage s) {
    switch (s) {
        case Stage::official: return "1";
        case Stage::checkin: return "1b";
        case Stage::external: return "2";
        case Stage::content: return "3";
        case Stage::fallback: return "fallback";
    }
    return "?";
}

struct PipelineConfig {
    std::set<std::string> official_accounts;
    std::vector<std::string> checkin_patterns{"I'm at"};
    TopicId official_topic = "T3";
    TopicId checkin_topic = "T5";
    TopicId fallback_topic = "T8";
    std::vector<TopicId> stage2_topics{"T4", "T7", "T8"};
    std::vector<TopicId> stage3_topics{"T1", "T2", "T6"};
    std::map<TopicId, LinearModel> models;
    std::map<TopicId, FeatureSpace> spaces;

    void validate() const {
        std::set<TopicId> seen{official_topic, checkin_topic};
        if (official_topic == checkin_topic) throw ContractError("official and check-in topics must differ");
        for (const auto* stage : {&stage2_topics, &stage3_topics}) {
            for (const auto& t : *stage) {
                if (!seen.insert(t).second) throw ContractError("topic '" + t + "' appears in more than one stage");
                auto m = models.find(t);
                if (m == models.end()) throw ContractError("no model for configured topic '" + t + "'");
                auto s = spaces.find(t);
                if (s == spaces.end()) throw ContractError("no feature space for configured topic '" + t + "'");
                if (s->second.dimension() != m->second.weights.size())
                    throw ContractError("model and feature space dimensions differ for topic '" + t + "'");
            }
        }
    }
};

struct TopicAssignment {
    std::string doc_id;
    std::set<TopicId> topics;
    std::map<TopicId, Stage> stage;

    bool operator==(const TopicAssignment&) const = default;
};

namespace detail {

inline bool classifier_fires(const PipelineConfig& cfg, const TopicId& topic, const Document& doc) {
    auto m = cfg.models.find(topic);
    auto s = cfg.spaces.find(topic);
    if (m == cfg.models.end() || s == cfg.spaces.end())
        throw ContractError("no model for configured topic '" + topic + "'");
    return predict(m->second, featurize(doc, s->second)).label == 1;
}

inline TopicAssignment single(const Document& doc, const TopicId& t, Stage s) {
    TopicAssignment a;
    a.doc_id = doc.id;
    a.topics.insert(t);
    a.stage.emplace(t, s);
    return a;
}

}  // namespace detail

/// Assumes `cfg` has been validated; classify_corpus does so.
inline TopicAssignment route(const Document& doc, const PipelineConfig& cfg) {
    if (cfg.official_accounts.count(doc.author)) return detail::single(doc, cfg.official_topic, Stage::official);
    for (const auto& p : cfg.checkin_patterns)
        if (!p.empty() && doc.text.find(p) != std::string::npos)
            return detail::single(doc, cfg.checkin_topic, Stage::checkin);
    for (const auto& t : cfg.stage2_topics)
        if (detail::classifier_fires(cfg, t, doc)) return detail::single(doc, t, Stage::external);

    TopicAssignment a;
    a.doc_id = doc.id;
    for (const auto& t : cfg.stage3_topics) {
        if (detail::classifier_fires(cfg, t, doc)) {
            a.topics.insert(t);
            a.stage.emplace(t, Stage::content);
        }
    }
    if (a.topics.empty()) return detail::single(doc, cfg.fallback_topic, Stage::fallback);
    return a;
}

inline std::vector<TopicAssignment> classify_corpus(const std::vector<Document>& docs, const PipelineConfig& cfg) {
    cfg.validate();
    std::vector<TopicAssignment> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(route(d, cfg));
    return out;
}

/// Stable sort of topics by descending F1; topics without a score keep their relative order at the end.
inline std::vector<TopicId> order_by_f1(std::vector<TopicId> topics, const std::map<TopicId, double>& f1_scores) {
    std::stable_sort(topics.begin(), topics.end(), [&](const TopicId& a, const TopicId& b) {
        auto fa = f1_scores.find(a), fb = f1_scores.find(b);
        const double va = fa == f1_scores.end() ? -1.0 : fa->second;
        const double vb = fb == f1_scores.end() ? -1.0 : fb->second;
        return va > vb;
    });
    return topics;
}

// ---------------------------------------------------------------------------
// Aggregation

struct AggregateResult {
    ObservationMatrix matrix;
    std::vector<std::string> dropped;  // documents without a station id
};

/// Topic columns x1..xk in the given order, then sales y. Rows are every station with a
/// sales record, sorted by id.
inline AggregateResult aggregate(const std::vector<TopicAssignment>& assignments, const std::vector<Document>& docs,
                                 const std::map<std::string, double>& sales,
                                 const std::vector<TopicId>& topic_columns = {"T1", "T2", "T3", "T4", "T5", "T6",
                                                                              "T7"}) {
    std::map<std::string, const Document*> by_id;
    for (const auto& d : docs) by_id.emplace(d.id, &d);

    AggregateResult out;
    std::map<std::string, std::map<TopicId, double>> counts;
    std::set<std::string> missing_sales;
    for (const auto& a : assignments) {
        auto it = by_id.find(a.doc_id);
        if (it == by_id.end()) throw ContractError("assignment for unknown document '" + a.doc_id + "'");
        const Document& d = *it->second;
        if (!d.station_id) {
            out.dropped.push_back(d.id);
            continue;
        }
        if (!sales.count(*d.station_id)) missing_sales.insert(*d.station_id);
        auto& row = counts[*d.station_id];
        for (const auto& t : a.topics) row[t] += 1.0;
    }
    if (!missing_sales.empty()) {
        std::string list;
        for (const auto& s : missing_sales) list += (list.empty() ? "" : ", ") + s;
        throw ContractError("stations with documents but no sales record: " + list);
    }

    auto& m = out.matrix;
    for (std::size_t k = 0; k < topic_columns.size(); ++k) m.columns.push_back("x" + std::to_string(k + 1));
    m.columns.push_back("y");
    const auto cols = static_cast<Eigen::Index>(m.columns.size());
    m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sales.size()), cols);
    Eigen::Index r = 0;
    for (const auto& [station, y] : sales) {
        if (!std::isfinite(y)) throw ContractError("non-finite sales for station '" + station + "'");
        m.station_ids.push_back(station);
        if (auto c = counts.find(station); c != counts.end())
            for (std::size_t k = 0; k < topic_columns.size(); ++k)
                if (auto v = c->second.find(topic_columns[k]); v != c->second.end())
                    m.values(r, static_cast<Eigen::Index>(k)) = v->second;
        m.values(r, cols - 1) = y;
        ++r;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Files

inline std::set<std::string> load_official_accounts(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open " + path.string());
    std::set<std::string> out;
    for (std::string line; std::getline(in, line);) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
        const auto start = line.find_first_not_of(" \t");
        if (start != std::string::npos) out.insert(line.substr(start));
    }
    return out;
}

inline std::map<std::string, double> load_sales(const std::filesystem::path& path) {
    std::map<std::string, double> out;
    for (const auto& row : csv::read_with_header(path, {"station_id", "sales"})) {
        const std::string where = path.string() + ":" + std::to_string(row.line);
        if (!out.emplace(row.fields[0], csv::parse_double(row.fields[1], where)).second)
            throw ContractError(where + ": duplicate station '" + row.fields[0] + "'");
    }
    return out;
}

inline void save_assignments(const std::vector<TopicAssignment>& assignments, const std::filesystem::path& path) {
    csv::Writer w(path);
    w.row({"doc_id", "topics", "stages"});
    for (const auto& a : assignments) {
        std::string topics, stages;
        for (const auto& t : a.topics) {
            topics += (topics.empty() ? "" : ";") + t;
            stages += (stages.empty() ? "" : ";") + stage_name(a.stage.at(t));
        }
        w.row({a.doc_id, topics, stages});
    }
}

}  // namespace ewom
