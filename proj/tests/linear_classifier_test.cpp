#include <gtest/gtest.h>

#include <random>

#include "ewom/linear_classifier.hpp"
#include "ewom/synthgen.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ewom;

namespace {

std::vector<FeatureVector> points(const std::vector<std::vector<double>>& xs) {
    std::vector<FeatureVector> out;
    for (std::size_t i = 0; i < xs.size(); ++i) out.push_back({"p" + std::to_string(i), xs[i]});
    return out;
}

LinearModel model(std::vector<double> w, double b) {
    LinearModel m;
    m.weights = std::move(w);
    m.bias = b;
    return m;
}

// Two Gaussian blobs centred at (+2, +2) and (-2, -2).
void blobs(std::mt19937_64& rng, std::size_t per_class, double spread, std::vector<FeatureVector>& x,
           std::vector<int>& y) {
    std::normal_distribution<double> noise(0.0, spread);
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const int label = i < per_class ? 1 : -1;
        x.push_back({"p" + std::to_string(i), {2.0 * label + noise(rng), 2.0 * label + noise(rng)}});
        y.push_back(label);
    }
}

double accuracy(const LinearModel& m, const std::vector<FeatureVector>& x, const std::vector<int>& y) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < x.size(); ++i) ok += predict(m, x[i]).label == y[i];
    return static_cast<double>(ok) / static_cast<double>(x.size());
}

}  // namespace

TEST(Featurize, CountsKeywordOccurrences) {
    const FeatureSpace space({{"T1", "ice"}, {"T7", "bike"}});
    Document d;
    d.id = "d";
    d.tokens = {"ice", "ice", "bike"};
    EXPECT_EQ(featurize(d, space).values, (std::vector<double>{2, 1}));
    d.tokens = {"rain"};
    EXPECT_EQ(featurize(d, space).values, (std::vector<double>{0, 0}));
}

TEST(Featurize, EmptySpaceFailsAtTrainTime) {
    Document d;
    d.tokens = {"x"};
    const auto fv = featurize(d, FeatureSpace{});
    EXPECT_TRUE(fv.values.empty());
    std::vector<FeatureVector> xs{fv, fv};
    std::vector<int> y{1, -1};
    EXPECT_THROW(train(xs, y, {}), ContractError);
}

TEST(FeatureSpace, DuplicateCoordinateRejected) {
    EXPECT_THROW(FeatureSpace({{"T1", "a"}, {"T1", "a"}}), ContractError);
    EXPECT_NO_THROW(FeatureSpace({{"T1", "a"}, {"T2", "a"}}));
}

TEST(Predict, Examples) {
    auto p = predict(model({1}, 0), std::vector<double>{2});
    EXPECT_EQ(p.label, 1);
    EXPECT_EQ(p.margin, 2.0);
    p = predict(model({1}, 0), std::vector<double>{0});
    EXPECT_EQ(p.label, 1);
    EXPECT_EQ(p.margin, 0.0);
    p = predict(model({2, -1}, 0.5), std::vector<double>{1, 3});
    EXPECT_EQ(p.label, -1);
    EXPECT_DOUBLE_EQ(p.margin, -0.5);
}

TEST(Predict, DimensionMismatch) {
    EXPECT_THROW(predict(model({1, 2}, 0), std::vector<double>{1}), ContractError);
}

TEST(Train, SymmetricSeparablePair) {
    const auto x = points({{-1}, {1}});
    const std::vector<int> y{-1, 1};
    Hyper h;
    h.C = 100;
    const auto m = train(x, y, h);
    EXPECT_TRUE(m.converged);
    EXPECT_GT(m.weights[0], 0.0);
    EXPECT_EQ(predict(m, x[0]).label, -1);
    EXPECT_EQ(predict(m, x[1]).label, 1);
}

TEST(Train, XorCompletesWithViolations) {
    const auto x = points({{-2}, {-1}, {1}, {2}});
    const std::vector<int> y{1, -1, -1, 1};
    const auto m = train(x, y, {});
    EXPECT_GE(margin_violations(m, x, y), 1u);
}

TEST(Train, SeparableBlobsFullTrainingAccuracy) {
    std::mt19937_64 rng(1);
    std::vector<FeatureVector> x;
    std::vector<int> y;
    blobs(rng, 50, 0.5, x, y);
    const auto m = train(x, y, {});
    EXPECT_EQ(accuracy(m, x, y), 1.0);
}

TEST(Train, ObjectiveNoWorseThanSubgradientOracle) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<FeatureVector> x;
        std::vector<int> y;
        blobs(rng, 25, 1.5 + trial * 0.5, x, y);
        for (double C : {0.1, 1.0}) {
            Hyper h;
            h.C = C;
            h.tol = 1e-6;
            h.max_iter = 10000;
            const auto m = train(x, y, h, 3);
            const double ours = primal_objective(m, x, y);
            const double oracle = ewom::testing::subgradient_objective(x, y, C, 20000);
            EXPECT_LE(ours, oracle * 1.001 + 1e-9) << "trial " << trial << " C " << C;
        }
    }
}

TEST(Train, SeparableLargeCHasNonnegativeMargins) {
    std::mt19937_64 rng(4);
    std::vector<FeatureVector> x;
    std::vector<int> y;
    blobs(rng, 30, 0.4, x, y);
    Hyper h;
    h.C = 1e3;
    h.max_iter = 20000;
    const auto m = train(x, y, h);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_GE(y[i] * predict(m, x[i]).margin, 0.0);
}

TEST(Train, DeterministicGivenSeed) {
    std::mt19937_64 rng(8);
    std::vector<FeatureVector> x;
    std::vector<int> y;
    blobs(rng, 40, 1.5, x, y);
    const auto a = train(x, y, {}, 42), b = train(x, y, {}, 42);
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.bias, b.bias);
}

TEST(Train, Errors) {
    const auto x = points({{1}, {2}});
    EXPECT_THROW(train(x, std::vector<int>{1, 1}, {}), ContractError);
    EXPECT_THROW(train(points({{1}, {NAN}}), std::vector<int>{1, -1}, {}), ContractError);
    EXPECT_THROW(train(x, std::vector<int>{1, 0}, {}), ContractError);
    EXPECT_THROW(train({}, std::vector<int>{}, {}), ContractError);
}

TEST(F1, Examples) {
    EXPECT_EQ(f1(1.0, 1.0), 1.0);
    EXPECT_EQ(f1(0.0, 0.0), 0.0);
    EXPECT_NEAR(f1(0.8, 0.9), 0.84706, 1e-5);
    EXPECT_THROW(f1(1.2, 0.5), ContractError);
    EXPECT_THROW(f1(0.5, -0.1), ContractError);
}

TEST(Score, AllNegativePredictions) {
    const std::vector<int> truth{1, -1, 1}, predicted{-1, -1, -1};
    const auto m = score(truth, predicted);
    EXPECT_EQ(m.precision, 0.0);
    EXPECT_EQ(m.recall, 0.0);
    EXPECT_EQ(m.f1, 0.0);
}

TEST(StratifiedFolds, PartitionAndBalance) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 5);
        std::vector<int> y;
        const std::size_t pos = k + rng() % 20, neg = k + rng() % 40;
        y.insert(y.end(), pos, 1);
        y.insert(y.end(), neg, -1);
        std::shuffle(y.begin(), y.end(), rng);
        const auto fold = stratified_folds(y, k, trial);
        std::vector<std::size_t> pos_in(k, 0), neg_in(k, 0);
        for (std::size_t i = 0; i < y.size(); ++i) {
            ASSERT_GE(fold[i], 0);
            ASSERT_LT(fold[i], k);
            (y[i] == 1 ? pos_in : neg_in)[fold[i]]++;
        }
        for (int f = 0; f < k; ++f) {
            EXPECT_GE(pos_in[f], 1u);
            EXPECT_LE(*std::max_element(pos_in.begin(), pos_in.end()) - *std::min_element(pos_in.begin(), pos_in.end()),
                      1u);
            EXPECT_LE(*std::max_element(neg_in.begin(), neg_in.end()) - *std::min_element(neg_in.begin(), neg_in.end()),
                      1u);
        }
    }
}

TEST(KfoldEvaluate, SeparableGivesPerfectF1) {
    std::mt19937_64 rng(2);
    std::vector<FeatureVector> x;
    std::vector<int> y;
    blobs(rng, 30, 0.5, x, y);
    for (int k : {2, 5, 10}) {
        const auto m = kfold_evaluate(x, y, k, {}, 7);
        EXPECT_EQ(m.f1, 1.0) << "k=" << k;
        EXPECT_EQ(m.per_fold.size(), static_cast<std::size_t>(k));
    }
}

TEST(KfoldEvaluate, KAboveMinorityRejected) {
    const auto x = points({{1}, {2}, {3}, {4}, {5}});
    const std::vector<int> y{1, 1, -1, -1, -1};
    EXPECT_THROW(kfold_evaluate(x, y, 3, {}, 0), ContractError);
}

TEST(KfoldEvaluate, InvariantToFeatureRelabelling) {
    // Permuting feature coordinates permutes weights and leaves predictions unchanged.
    std::mt19937_64 rng(21);
    std::vector<FeatureVector> x;
    std::vector<int> y;
    blobs(rng, 30, 2.0, x, y);
    auto swapped = x;
    for (auto& fv : swapped) std::swap(fv.values[0], fv.values[1]);
    Hyper h;
    h.tol = 1e-8;
    h.max_iter = 100000;
    const auto a = kfold_evaluate(x, y, 5, h, 1), b = kfold_evaluate(swapped, y, 5, h, 1);
    EXPECT_NEAR(a.f1, b.f1, 1e-12);
}

TEST(KfoldEvaluate, SynthCorpusTopicsSeparable) {
    auto spec = default_corpus_spec(3, 5, 10);
    spec.docs_per_topic = 30;
    spec.seed = 5;
    const auto corpus = generate_corpus(spec);
    const auto space = FeatureSpace::from_keywords(extract_keywords(corpus, {}));
    const auto x = featurize_all(corpus.documents(), space);
    for (const auto& t : corpus.catalog())
        EXPECT_EQ(kfold_evaluate(x, binary_labels(corpus, t.id), 5, {}, 0).f1, 1.0) << t.id;
}

TEST(ModelIo, RoundTrip) {
    ewom::testing::TempDir tmp;
    const auto m = model({0.1, -2.5, 1e-17}, 0.3);
    save_model(m, tmp / "m.csv");
    const auto back = load_model(tmp / "m.csv");
    EXPECT_EQ(back.weights, m.weights);
    EXPECT_EQ(back.bias, m.bias);

    const FeatureSpace space({{"T1", "ice"}, {"T7", "bike,s"}});
    save_feature_space(space, tmp / "f.csv");
    EXPECT_EQ(load_feature_space(tmp / "f.csv"), space);
}
