#include <gtest/gtest.h>

#include "ewom/causal_lingam.hpp"
#include "ewom/entropy_keywords.hpp"
#include "ewom/synthgen.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ewom;

namespace {

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd ca = a.array() - a.mean(), cb = b.array() - b.mean();
    return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

}  // namespace

TEST(GenerateSem, IndependentColumnsWhenBIsZero) {
    StructuralSpec s;
    s.names = {"a", "b", "c", "d"};
    s.B0 = Eigen::MatrixXd::Zero(4, 4);
    s.noise.assign(4, NoiseSpec{});
    s.n = 5000;
    s.seed = 1;
    const auto& v = generate_sem(s).observations.values;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < i; ++j) EXPECT_LT(std::abs(correlation(v.col(i), v.col(j))), 0.05);
}

TEST(GenerateSem, ChainSlopeMatchesOls) {
    const auto& v = generate_sem(chain_spec(0.8, 5000, 2)).observations.values;
    const Eigen::VectorXd x = v.col(0).array() - v.col(0).mean();
    const Eigen::VectorXd y = v.col(1).array() - v.col(1).mean();
    const double slope = x.dot(y) / x.squaredNorm();
    EXPECT_GE(slope, 0.75);
    EXPECT_LE(slope, 0.85);
}

TEST(GenerateSem, NoiseMoments) {
    for (auto [kind, expected] : {std::pair{NoiseKind::uniform, -1.2}, std::pair{NoiseKind::laplace, 3.0},
                                  std::pair{NoiseKind::gaussian, 0.0}}) {
        StructuralSpec s;
        s.names = {"e"};
        s.B0 = Eigen::MatrixXd::Zero(1, 1);
        s.noise = {{kind, 2.0}};
        s.n = 200000;
        s.seed = 3;
        const Eigen::VectorXd e = generate_sem(s).observations.values.col(0);
        const double sd = std::sqrt((e.array() - e.mean()).square().mean());
        EXPECT_NEAR(sd, 2.0, 0.03);
        EXPECT_NEAR(excess_kurtosis(e.transpose()), expected, 0.15);
    }
}

TEST(GenerateSem, MeansShrinkWithN) {
    for (std::size_t n : {100u, 1000u, 10000u}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto& v = generate_sem(star_spec({0.5, -0.5}, n, seed)).observations.values;
            for (int j = 0; j < 2; ++j)
                EXPECT_LT(std::abs(v.col(j).mean()), 3.0 / std::sqrt(static_cast<double>(n)));
        }
    }
}

TEST(GenerateSem, Deterministic) {
    const auto a = generate_sem(star_spec({0.5, -0.5, 1.0}, 300, 9));
    const auto b = generate_sem(star_spec({0.5, -0.5, 1.0}, 300, 9));
    EXPECT_EQ(a.observations.values, b.observations.values);
    EXPECT_EQ(a.observations.station_ids, b.observations.station_ids);
    EXPECT_NE(a.observations.values, generate_sem(star_spec({0.5, -0.5, 1.0}, 300, 10)).observations.values);
}

TEST(GenerateSem, CyclicBRejected) {
    StructuralSpec s;
    s.names = {"a", "b"};
    s.B0 = Eigen::Matrix2d{{0, 0.5}, {0.5, 0}};
    s.noise.assign(2, NoiseSpec{});
    EXPECT_THROW(generate_sem(s), ContractError);
    s.B0 = Eigen::Matrix2d{{0.1, 0}, {0.5, 0}};
    EXPECT_THROW(generate_sem(s), ContractError);
}

TEST(GenerateSem, ArbitraryTopologicalOrder) {
    // c -> a -> b, stated out of order.
    StructuralSpec s;
    s.names = {"a", "b", "c"};
    s.B0 = Eigen::Matrix3d{{0, 0, 1.0}, {2.0, 0, 0}, {0, 0, 0}};
    s.noise.assign(3, NoiseSpec{});
    s.n = 10;
    const auto& v = generate_sem(s).observations.values;
    s.B0.setZero();
    const auto& e = generate_sem(s).observations.values;
    for (int t = 0; t < 10; ++t) {
        EXPECT_NEAR(v(t, 2), e(t, 2), 1e-15);
        EXPECT_NEAR(v(t, 0), e(t, 0) + e(t, 2), 1e-12);
        EXPECT_NEAR(v(t, 1), e(t, 1) + 2.0 * v(t, 0), 1e-12);
    }
}

TEST(GenerateCorpus, NoiseFreeKeywordsAreExactlyExclusiveVocabularies) {
    auto spec = default_corpus_spec(2, 5, 10);
    spec.docs_per_topic = 10;
    spec.seed = 4;
    const auto corpus = generate_corpus(spec);
    const auto kw = ewom::testing::as_sets(extract_keywords(corpus, {}));
    EXPECT_EQ(kw, ewom::testing::oracle_keywords(corpus, 2.0));
    for (const auto& t : spec.topics) EXPECT_EQ(kw.at(t.id), (std::set<std::string>(t.exclusive.begin(), t.exclusive.end())));
}

TEST(GenerateCorpus, PureNoiseYieldsNoKeywords) {
    auto spec = default_corpus_spec(3, 5, 10);
    spec.noise_rate = 1.0;
    spec.docs_per_topic = 40;
    spec.tokens_per_doc = 20;
    spec.seed = 4;
    for (const auto& [_, ks] : extract_keywords(generate_corpus(spec), {})) EXPECT_TRUE(ks.keywords.empty());
}

TEST(GenerateCorpus, ByteIdenticalOnRepeat) {
    auto spec = default_corpus_spec(4, 6, 10);
    spec.noise_rate = 0.3;
    spec.multi_label_rate = 0.2;
    spec.stations = 5;
    spec.seed = 12;
    ewom::testing::TempDir tmp;
    save_documents(generate_corpus(spec).documents(), tmp / "a.jsonl");
    save_documents(generate_corpus(spec).documents(), tmp / "b.jsonl");
    EXPECT_EQ(ewom::testing::read_file(tmp / "a.jsonl"), ewom::testing::read_file(tmp / "b.jsonl"));
}

TEST(GenerateCorpus, MultiLabelAndStations) {
    auto spec = default_corpus_spec(4, 6, 10);
    spec.multi_label_rate = 0.5;
    spec.stations = 3;
    spec.docs_per_topic = 50;
    const auto c = generate_corpus(spec);
    std::size_t multi = 0;
    for (const auto& d : c.documents()) {
        multi += c.labels_of(d.id).size() > 1;
        ASSERT_TRUE(d.station_id);
        EXPECT_TRUE(*d.station_id == "S001" || *d.station_id == "S002" || *d.station_id == "S003");
    }
    EXPECT_GT(multi, 60u);
    EXPECT_LT(multi, 140u);
}

TEST(GenerateCorpus, EmptyVocabularyRejected) {
    CorpusSpec spec;
    EXPECT_THROW(generate_corpus(spec), ContractError);
    spec.topics.push_back({"T1", "x", {}});
    EXPECT_THROW(generate_corpus(spec), ContractError);
}

TEST(SpecJson, ParsesStructuralAndCorpusSpecs) {
    const auto s = structural_spec_from_json(nlohmann::json::parse(
        R"({"kind":"sem","B0":[[0,0],[0.8,0]],"noise":"laplace","scale":2,"n":50,"seed":3})"));
    EXPECT_EQ(s.names, (std::vector<std::string>{"x1", "x2"}));
    EXPECT_EQ(s.B0(1, 0), 0.8);
    EXPECT_EQ(s.noise[1].kind, NoiseKind::laplace);
    EXPECT_EQ(s.noise[1].scale, 2.0);
    EXPECT_EQ(s.n, 50u);

    const auto c = corpus_spec_from_json(nlohmann::json::parse(R"({"kind":"corpus","topics":3,"noise_rate":0.25})"));
    EXPECT_EQ(c.topics.size(), 3u);
    EXPECT_EQ(c.noise_rate, 0.25);

    EXPECT_THROW(structural_spec_from_json(nlohmann::json::parse(R"({"B0":[[0,1]]})")), ContractError);
    EXPECT_THROW(structural_spec_from_json(nlohmann::json::parse(R"({"B0":[[0]],"noise":"cauchy"})")), ContractError);
}
