#pragma once

// Binary soft-margin linear SVM over keyword-count features.
//
// Training solves the dual of
//     min_{w,b}  1/2 (|w|^2 + b^2) + C sum_i max(0, 1 - y_i (w.x_i + b))
// by coordinate descent: the bias is carried as an extra constant feature, so
// the box 0 <= a_i <= C is the only dual constraint and each coordinate step
// has a closed form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ewom/corpus.hpp"
#include "ewom/csv.hpp"
#include "ewom/entropy_keywords.hpp"
#include "ewom/error.hpp"

namespace ewom {

class FeatureSpace {
public:
    using Coordinate = std::pair<TopicId, std::string>;

    FeatureSpace() = default;

    explicit FeatureSpace(std::vector<Coordinate> coords) : coords_(std::move(coords)) {
        std::set<Coordinate> seen;
        for (std::size_t i = 0; i < coords_.size(); ++i) {
            if (!seen.insert(coords_[i]).second)
                throw ContractError("duplicate feature (" + coords_[i].first + ", " + coords_[i].second + ")");
            by_word_[coords_[i].second].push_back(i);
        }
    }

    /// Union of all keyword sets, ordered by (topic, word).
    static FeatureSpace from_keywords(const KeywordMap& keywords) {
        std::vector<Coordinate> coords;
        for (const auto& [topic, set] : keywords)
            for (const auto& w : set.keywords) coords.emplace_back(topic, w);
        return FeatureSpace(std::move(coords));
    }

    std::size_t dimension() const noexcept { return coords_.size(); }
    const std::vector<Coordinate>& coordinates() const noexcept { return coords_; }

    /// Coordinates whose keyword equals `word`.
    std::span<const std::size_t> lookup(const std::string& word) const {
        auto it = by_word_.find(word);
        if (it == by_word_.end()) return {};
        return it->second;
    }

    bool operator==(const FeatureSpace& o) const { return coords_ == o.coords_; }

private:
    std::vector<Coordinate> coords_;
    std::map<std::string, std::vector<std::size_t>> by_word_;
};

struct FeatureVector {
    std::string doc_id;
    std::vector<double> values;
};

struct Hyper {
    double C = 1.0;
    double tol = 1e-4;
    int max_iter = 1000;
};

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    Hyper hyper;
    int iterations = 0;
    bool converged = false;

    double decision(std::span<const double> x) const {
        if (x.size() != weights.size())
            throw ContractError("feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                                std::to_string(weights.size()));
        double s = bias;
        for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
        return s;
    }
};

struct Prediction {
    int label;
    double margin;
};

struct FoldMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::vector<FoldMetrics> per_fold;
};

/// Harmonic mean of precision and recall; 0 when both are 0.
inline double f1(double precision, double recall) {
    if (!(precision >= 0.0 && precision <= 1.0) || !(recall >= 0.0 && recall <= 1.0))
        throw ContractError("precision and recall must lie in [0, 1]");
    const double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

inline FeatureVector featurize(const Document& doc, const FeatureSpace& space) {
    FeatureVector fv{doc.id, std::vector<double>(space.dimension(), 0.0)};
    for (const auto& tok : doc.tokens)
        for (std::size_t idx : space.lookup(tok)) fv.values[idx] += 1.0;
    return fv;
}

inline Prediction predict(const LinearModel& model, std::span<const double> x) {
    const double m = model.decision(x);
    return {m >= 0.0 ? +1 : -1, m};
}

inline Prediction predict(const LinearModel& model, const FeatureVector& fv) { return predict(model, fv.values); }

namespace detail {

inline void check_training_set(const std::vector<FeatureVector>& features, std::span<const int> labels) {
    if (features.size() != labels.size()) throw ContractError("feature and label counts differ");
    if (features.empty()) throw ContractError("empty training set");
    const std::size_t dim = features.front().values.size();
    if (dim == 0) throw ContractError("feature space is empty");
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].values.size() != dim) throw ContractError("inconsistent feature dimensions");
        for (double v : features[i].values)
            if (!std::isfinite(v)) throw ContractError("non-finite feature value in '" + features[i].doc_id + "'");
        if (labels[i] == 1)
            pos = true;
        else if (labels[i] == -1)
            neg = true;
        else
            throw ContractError("labels must be +1 or -1");
    }
    if (!pos || !neg) throw ContractError("training set contains a single class");
}

}  // namespace detail

inline LinearModel train(const std::vector<FeatureVector>& features, std::span<const int> labels, const Hyper& hyper,
                         std::uint64_t seed = 0) {
    if (!(hyper.C > 0.0)) throw ContractError("C must be > 0");
    if (!(hyper.tol > 0.0)) throw ContractError("tol must be > 0");
    if (hyper.max_iter <= 0) throw ContractError("max_iter must be positive");
    detail::check_training_set(features, labels);

    const std::size_t n = features.size();
    const std::size_t dim = features.front().values.size();
    std::vector<double> w(dim, 0.0);
    double b = 0.0;
    std::vector<double> alpha(n, 0.0);
    std::vector<double> qii(n, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (double v : features[i].values) qii[i] += v * v;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);

    LinearModel model;
    model.hyper = hyper;
    const double C = hyper.C;
    int iter = 0;
    for (; iter < hyper.max_iter; ++iter) {
        std::shuffle(order.begin(), order.end(), rng);
        double pg_max = -INFINITY, pg_min = INFINITY;
        for (std::size_t i : order) {
            const auto& x = features[i].values;
            const double y = labels[i];
            double wx = b;
            for (std::size_t k = 0; k < dim; ++k) wx += w[k] * x[k];
            const double g = y * wx - 1.0;
            double pg = g;
            if (alpha[i] == 0.0)
                pg = std::min(g, 0.0);
            else if (alpha[i] == C)
                pg = std::max(g, 0.0);
            pg_max = std::max(pg_max, pg);
            pg_min = std::min(pg_min, pg);
            if (pg != 0.0) {
                const double old = alpha[i];
                alpha[i] = std::clamp(old - g / qii[i], 0.0, C);
                const double d = (alpha[i] - old) * y;
                for (std::size_t k = 0; k < dim; ++k) w[k] += d * x[k];
                b += d;
            }
        }
        if (pg_max - pg_min <= hyper.tol) {
            model.converged = true;
            ++iter;
            break;
        }
    }
    model.weights = std::move(w);
    model.bias = b;
    model.iterations = iter;
    return model;
}

/// 1/2 (|w|^2 + b^2) + C * sum of hinge losses.
inline double primal_objective(const LinearModel& model, const std::vector<FeatureVector>& features,
                               std::span<const int> labels) {
    double reg = model.bias * model.bias;
    for (double v : model.weights) reg += v * v;
    double loss = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i)
        loss += std::max(0.0, 1.0 - labels[i] * model.decision(features[i].values));
    return 0.5 * reg + model.hyper.C * loss;
}

/// Training points with functional margin y f(x) < 1.
inline std::size_t margin_violations(const LinearModel& model, const std::vector<FeatureVector>& features,
                                     std::span<const int> labels) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < features.size(); ++i)
        if (labels[i] * model.decision(features[i].values) < 1.0) ++count;
    return count;
}

/// Seeded stratified assignment of each example to one of k folds.
inline std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
    if (k < 2) throw ContractError("k must be >= 2");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
    const std::size_t minority = std::min(pos.size(), neg.size());
    if (minority < static_cast<std::size_t>(k))
        throw ContractError("k=" + std::to_string(k) + " exceeds minority-class count " + std::to_string(minority));
    std::mt19937_64 rng(seed);
    std::shuffle(pos.begin(), pos.end(), rng);
    std::shuffle(neg.begin(), neg.end(), rng);
    std::vector<int> fold(labels.size(), 0);
    for (std::size_t j = 0; j < pos.size(); ++j) fold[pos[j]] = static_cast<int>(j % k);
    for (std::size_t j = 0; j < neg.size(); ++j) fold[neg[j]] = static_cast<int>(j % k);
    return fold;
}

inline FoldMetrics score(std::span<const int> truth, std::span<const int> predicted) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predicted[i] == 1 && truth[i] == 1) ++tp;
        if (predicted[i] == 1 && truth[i] == -1) ++fp;
        if (predicted[i] == -1 && truth[i] == 1) ++fn;
    }
    FoldMetrics m;
    m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = f1(m.precision, m.recall);
    return m;
}

/// Aggregate precision and recall are fold means; aggregate F1 is their harmonic mean.
inline Metrics kfold_evaluate(const std::vector<FeatureVector>& features, std::span<const int> labels, int k,
                              const Hyper& hyper, std::uint64_t seed) {
    if (features.size() != labels.size()) throw ContractError("feature and label counts differ");
    const auto fold = stratified_folds(labels, k, seed);
    Metrics out;
    for (int f = 0; f < k; ++f) {
        std::vector<FeatureVector> train_x;
        std::vector<int> train_y, test_y, test_pred;
        std::vector<std::size_t> test_idx;
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (fold[i] == f) {
                test_idx.push_back(i);
            } else {
                train_x.push_back(features[i]);
                train_y.push_back(labels[i]);
            }
        }
        const auto model = train(train_x, train_y, hyper, seed + static_cast<std::uint64_t>(f));
        for (std::size_t i : test_idx) {
            test_y.push_back(labels[i]);
            test_pred.push_back(predict(model, features[i]).label);
        }
        out.per_fold.push_back(score(test_y, test_pred));
    }
    for (const auto& m : out.per_fold) {
        out.precision += m.precision;
        out.recall += m.recall;
    }
    out.precision /= k;
    out.recall /= k;
    out.precision = std::clamp(out.precision, 0.0, 1.0);
    out.recall = std::clamp(out.recall, 0.0, 1.0);
    out.f1 = f1(out.precision, out.recall);
    return out;
}

/// +1/-1 labels for one topic, aligned with the corpus document order.
inline std::vector<int> binary_labels(const LabeledCorpus& corpus, const TopicId& topic) {
    std::vector<int> y;
    y.reserve(corpus.documents().size());
    for (const auto& d : corpus.documents()) y.push_back(corpus.has_label(d.id, topic) ? 1 : -1);
    return y;
}

inline std::vector<FeatureVector> featurize_all(const std::vector<Document>& docs, const FeatureSpace& space) {
    std::vector<FeatureVector> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(featurize(d, space));
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline void save_model(const LinearModel& model, const std::filesystem::path& path) {
    csv::Writer w(path);
    w.row({"feature_index", "weight"});
    for (std::size_t i = 0; i < model.weights.size(); ++i)
        w.row({std::to_string(i), csv::format_double(model.weights[i])});
    w.row({"bias", csv::format_double(model.bias)});
}

inline LinearModel load_model(const std::filesystem::path& path) {
    LinearModel m;
    bool have_bias = false;
    for (const auto& row : csv::read_with_header(path, {"feature_index", "weight"})) {
        const std::string where = path.string() + ":" + std::to_string(row.line);
        if (have_bias) throw ContractError(where + ": record after bias line");
        const double v = csv::parse_double(row.fields[1], where);
        if (row.fields[0] == "bias") {
            m.bias = v;
            have_bias = true;
            continue;
        }
        if (row.fields[0] != std::to_string(m.weights.size()))
            throw ContractError(where + ": feature indices must be consecutive from 0");
        m.weights.push_back(v);
    }
    if (!have_bias) throw ContractError(path.string() + ": missing bias line");
    return m;
}

inline void save_feature_space(const FeatureSpace& space, const std::filesystem::path& path) {
    csv::Writer w(path);
    w.row({"feature_index", "topic_id", "word"});
    for (std::size_t i = 0; i < space.dimension(); ++i)
        w.row({std::to_string(i), space.coordinates()[i].first, space.coordinates()[i].second});
}

inline FeatureSpace load_feature_space(const std::filesystem::path& path) {
    std::vector<FeatureSpace::Coordinate> coords;
    for (const auto& row : csv::read_with_header(path, {"feature_index", "topic_id", "word"})) {
        if (row.fields[0] != std::to_string(coords.size()))
            throw ContractError(path.string() + ":" + std::to_string(row.line) +
                                ": feature indices must be consecutive from 0");
        coords.emplace_back(row.fields[1], row.fields[2]);
    }
    return FeatureSpace(std::move(coords));
}

}  // namespace ewom
