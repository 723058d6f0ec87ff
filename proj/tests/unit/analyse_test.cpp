#include "wombat/analyse.hpp"

#include <cmath>
#include <random>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "../ranking_oracle.hpp"
#include "../test_util.hpp"
#include "wombat/error.hpp"

namespace wombat {
namespace {

using testing::TempDir;

const StopwordList kNone("none", {});

UnitResult unit(std::string raw, std::vector<std::string> words, std::vector<Vector> vectors,
                std::vector<std::string> missing = {})
{
    UnitResult u;
    u.raw = std::move(raw);
    u.tokens = words;
    u.tokens.insert(u.tokens.end(), missing.begin(), missing.end());
    u.words = std::move(words);
    u.vectors = std::move(vectors);
    u.missing = std::move(missing);
    return u;
}

TEST(AverageVector, ArithmeticMean)
{
    std::vector<std::string> words{"a", "b"};
    std::vector<Vector> vectors{{1, 2}, {3, 4}};
    auto avg = average_vector(words, vectors, kNone);
    EXPECT_TRUE(avg.defined);
    EXPECT_EQ(avg.vector, (Vector{2, 3}));
    EXPECT_EQ(avg.used_tokens, words);
}

TEST(AverageVector, ExcludesStopwords)
{
    std::vector<std::string> words{"the", "net"};
    std::vector<Vector> vectors{{9, 9}, {1, 1}};
    auto avg = average_vector(words, vectors, StopwordList("s", {"the"}));
    EXPECT_EQ(avg.vector, (Vector{1, 1}));
    EXPECT_EQ(avg.excluded, std::vector<std::string>{"the"});
}

TEST(AverageVector, AllStopwordsIsUndefined)
{
    std::vector<std::string> words{"the", "of"};
    std::vector<Vector> vectors{{9, 9}, {1, 1}};
    auto avg = average_vector(words, vectors, StopwordList::english());
    EXPECT_FALSE(avg.defined);
    EXPECT_TRUE(avg.used_tokens.empty());
    EXPECT_FALSE(average_vector(std::span<const std::string>{}, std::span<const Vector>{}, kNone).defined);
}

TEST(AverageVector, MixedLengthsRejected)
{
    std::vector<std::string> words{"a", "b"};
    std::vector<Vector> vectors{{1, 2}, {3}};
    EXPECT_THROW(average_vector(words, vectors, kNone), AnalysisError);
}

TEST(AverageVector, UnitReportsMissingAsExcluded)
{
    auto avg = average_vector(unit("x", {"net"}, {{1, 1}}, {"zz"}), kNone);
    EXPECT_EQ(avg.excluded, std::vector<std::string>{"zz"});
    EXPECT_TRUE(avg.defined);
}

TEST(AverageVector, DuplicatedListHasSameMean)
{
    std::mt19937 rng(1);
    std::uniform_real_distribution<float> dist(-3, 3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> words;
        std::vector<Vector> vectors;
        for (int i = 0; i < 5; ++i) {
            words.push_back("w" + std::to_string(i));
            vectors.push_back({dist(rng), dist(rng), dist(rng)});
        }
        auto once = average_vector(words, vectors, kNone);
        auto w2 = words;
        auto v2 = vectors;
        w2.insert(w2.end(), words.begin(), words.end());
        v2.insert(v2.end(), vectors.begin(), vectors.end());
        auto twice = average_vector(w2, v2, kNone);
        for (std::size_t d = 0; d < 3; ++d) EXPECT_NEAR(once.vector[d], twice.vector[d], 1e-6);
    }
}

TEST(Cosine, Examples)
{
    Vector a{1, 2, 3};
    EXPECT_NEAR(*cosine_distance(a, a), 0.0, 1e-7);
    EXPECT_NEAR(*cosine_distance(Vector{1, 0}, Vector{0, 1}), 1.0, 1e-12);
    EXPECT_NEAR(*cosine_distance(Vector{1, 1}, Vector{1, 0}), 1.0 - 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(*cosine_distance(Vector{1, 1}, Vector{1, 0}), 0.2928932, 1e-7);
    EXPECT_NEAR(*cosine_distance(Vector{1, 0}, Vector{-1, 0}), 2.0, 1e-12);
}

TEST(Cosine, ZeroNormIsUndefined)
{
    EXPECT_FALSE(cosine_distance(Vector{0, 0}, Vector{1, 0}).has_value());
    EXPECT_FALSE(cosine_similarity(Vector{1, 0}, Vector{0, 0}).has_value());
    EXPECT_THROW(cosine_distance(Vector{1}, Vector{1, 2}), AnalysisError);
}

TEST(Metrics, ByName)
{
    EXPECT_NEAR(*metric_by_name("euclidean")(Vector{0, 0}, Vector{3, 4}), 5.0, 1e-12);
    EXPECT_NEAR(*metric_by_name("cosine_similarity")(Vector{1, 0}, Vector{0, 1}), 0.0, 1e-12);
    EXPECT_NEAR(*metric_by_name("cosine")(Vector{1, 0}, Vector{0, 1}), 1.0, 1e-12);
    EXPECT_THROW(metric_by_name("manhattan"), AnalysisError);
}

RetrievalResult single_wec(std::vector<UnitResult> units)
{
    return RetrievalResult{{WecResult{"algo:a;dataset:d;dims:2;fold:0;unit:token", std::move(units)}}};
}

TEST(PairwiseDistances, IdenticalSentencesRankFirst)
{
    auto first = single_wec({unit("a b", {"a", "b"}, {{1, 0}, {0, 1}}), unit("x", {"x"}, {{1, 0}})});
    auto second = single_wec({unit("a b", {"a", "b"}, {{1, 0}, {0, 1}}), unit("y", {"y"}, {{0, 1}})});
    auto ranking = pairwise_distances(first, second, cosine_distance, false, kNone);
    ASSERT_EQ(ranking.per_wec.size(), 1u);
    const auto& r = ranking.per_wec[0].ranked;
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(r[0].distance, 0.0, 1e-7);
    EXPECT_EQ(r[0].sentence1, "a b");
    EXPECT_NEAR(r[1].distance, 1.0, 1e-7);
}

TEST(PairwiseDistances, ThreeHandBuiltPairs)
{
    // Sentence means: s1 (1,0) vs (1,1); s2 (1,0) vs (0,1); s3 (1,1) vs (2,2).
    auto first = single_wec({unit("p", {"p"}, {{1, 0}}), unit("q", {"q"}, {{1, 0}}), unit("r", {"r"}, {{1, 1}})});
    auto second = single_wec({unit("P", {"p1", "p2"}, {{1, 0}, {1, 2}}), unit("Q", {"q"}, {{0, 1}}),
                              unit("R", {"r"}, {{2, 2}})});
    std::vector<std::pair<double, std::string>> expected{{1.0 - 1.0 / std::sqrt(2.0), "p"}, {1.0, "q"}, {0.0, "r"}};
    std::sort(expected.begin(), expected.end());
    auto ranking = pairwise_distances(first, second, cosine_distance, false, kNone).per_wec[0].ranked;
    ASSERT_EQ(ranking.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(ranking[i].distance, expected[i].first, 1e-7);
        EXPECT_EQ(ranking[i].sentence1, expected[i].second);
    }
    auto reversed = pairwise_distances(first, second, cosine_distance, true, kNone).per_wec[0].ranked;
    EXPECT_EQ(reversed[0].sentence1, expected[2].second);
    EXPECT_EQ(reversed[2].sentence1, expected[0].second);
}

TEST(PairwiseDistances, UndefinedPairsListedSeparately)
{
    auto first = single_wec({unit("the", {"the"}, {{1, 0}}), unit("net", {"net"}, {{1, 0}}), unit("", {}, {}, {"zz"})});
    auto second = single_wec({unit("net", {"net"}, {{1, 0}}), unit("zero", {"zero"}, {{0, 0}}), unit("a", {"a"}, {{1, 1}})});
    auto ranking = pairwise_distances(first, second, cosine_distance, false, StopwordList::english());
    const auto& r = ranking.per_wec[0];
    EXPECT_TRUE(r.ranked.empty());
    EXPECT_EQ(r.undefined_pairs, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(PairwiseDistances, TiesBrokenBySentenceText)
{
    auto first = single_wec({unit("b", {"b"}, {{1, 0}}), unit("a", {"a"}, {{2, 0}}), unit("a", {"a"}, {{3, 0}})});
    auto second = single_wec({unit("z", {"z"}, {{1, 0}}), unit("y", {"y"}, {{1, 0}}), unit("x", {"x"}, {{1, 0}})});
    auto r = pairwise_distances(first, second, cosine_distance, false, kNone).per_wec[0].ranked;
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0].sentence1 + r[0].sentence2, "ax");
    EXPECT_EQ(r[1].sentence1 + r[1].sentence2, "ay");
    EXPECT_EQ(r[2].sentence1 + r[2].sentence2, "bz");
}

TEST(PairwiseDistances, ShapeMismatchRejected)
{
    auto one = single_wec({unit("a", {"a"}, {{1, 0}})});
    auto two = single_wec({unit("a", {"a"}, {{1, 0}}), unit("b", {"b"}, {{1, 0}})});
    EXPECT_THROW(pairwise_distances(one, two, cosine_distance, false, kNone), AnalysisError);
    RetrievalResult other{{WecResult{"algo:b;dataset:d;dims:2;fold:0;unit:token", one.per_wec[0].units}}};
    EXPECT_THROW(pairwise_distances(one, other, cosine_distance, false, kNone), AnalysisError);
}

struct RandomPairs {
    std::vector<testing::OracleSentence> first, second;
    RetrievalResult r1, r2;
};

RandomPairs random_pairs(std::mt19937& rng, int n, float scale = 1.0f)
{
    RandomPairs out;
    std::uniform_real_distribution<float> dist(-1, 1);
    const std::vector<std::string> vocab{"the", "of", "net", "petri", "theory", "graph", "model", "a"};
    auto sentence = [&](int i, char side) {
        testing::OracleSentence s;
        s.text = std::string(1, side) + std::to_string(i);
        for (int k = 1 + static_cast<int>(rng() % 4); k > 0; --k) {
            s.words.push_back(vocab[rng() % vocab.size()] + std::to_string(rng() % 3));
            s.vectors.push_back({dist(rng) * scale, dist(rng) * scale, dist(rng) * scale});
        }
        if (rng() % 5 == 0) s.words[0] = "the";
        return s;
    };
    WecResult w1{"algo:a;dataset:d;dims:3;fold:0;unit:token", {}};
    WecResult w2 = w1;
    for (int i = 0; i < n; ++i) {
        out.first.push_back(sentence(i, 's'));
        out.second.push_back(sentence(i, 't'));
        w1.units.push_back(unit(out.first.back().text, out.first.back().words, out.first.back().vectors));
        w2.units.push_back(unit(out.second.back().text, out.second.back().words, out.second.back().vectors));
    }
    out.r1.per_wec.push_back(w1);
    out.r2.per_wec.push_back(w2);
    return out;
}

TEST(PairwiseDistances, MatchesExhaustiveOracle)
{
    std::mt19937 rng(42);
    StopwordList stop("s", {"the"});
    for (int trial = 0; trial < 50; ++trial) {
        auto pairs = random_pairs(rng, 20);
        bool reverse = trial % 2;
        auto expected = testing::oracle_ranking(pairs.first, pairs.second, {"the"}, reverse);
        auto got = pairwise_distances(pairs.r1, pairs.r2, cosine_distance, reverse, stop).per_wec[0];
        ASSERT_EQ(got.ranked.size(), expected.size());
        EXPECT_EQ(got.ranked.size() + got.undefined_pairs.size(), 20u);
        for (std::size_t i = 0; i < expected.size(); ++i) {
            ASSERT_NEAR(got.ranked[i].distance, std::get<0>(expected[i]), 1e-6);
            ASSERT_EQ(got.ranked[i].sentence1, std::get<1>(expected[i]));
            ASSERT_EQ(got.ranked[i].sentence2, std::get<2>(expected[i]));
        }
    }
}

TEST(PairwiseDistances, ScaleInvariantOrder)
{
    for (float c : {0.001f, 3.0f, 1000.0f}) {
        std::mt19937 a(9), b(9);
        auto base = random_pairs(a, 30);
        auto scaled = random_pairs(b, 30, c);
        auto r1 = pairwise_distances(base.r1, base.r2, cosine_distance, false, kNone).per_wec[0].ranked;
        auto r2 = pairwise_distances(scaled.r1, scaled.r2, cosine_distance, false, kNone).per_wec[0].ranked;
        ASSERT_EQ(r1.size(), r2.size());
        for (std::size_t i = 0; i < r1.size(); ++i) EXPECT_EQ(r1[i].index, r2[i].index) << "scale " << c;
    }
}

TEST(WriteRanking, TabSeparatedSixDecimals)
{
    WecRanking r{"id", {{0.25, "a b", "c"}, {1.0 / 3.0, "d", "e"}}, {}};
    std::ostringstream out;
    write_ranking(r, out);
    EXPECT_EQ(out.str(), "0.250000\ta b\tc\n0.333333\td\te\n");
}

TEST(SimilarityMatrix, SelfSimilarityHasUnitDiagonal)
{
    auto u = unit("x", {"petri_net", "theory", "graph"}, {{1, 2}, {-1, 0.5}, {3, 3}});
    auto m = similarity_matrix(u, u, cosine_similarity);
    ASSERT_EQ(m.rows(), 3u);
    ASSERT_EQ(m.cols(), 3u);
    EXPECT_EQ(m.row_labels[0], "petri_net");
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(m.at(i, i), 1.0, 1e-6);
}

TEST(SimilarityMatrix, OrthogonalSingleCell)
{
    auto m = similarity_matrix(unit("a", {"a"}, {{1, 0}}), unit("b", {"b"}, {{0, 1}}), cosine_similarity);
    ASSERT_EQ(m.values.size(), 1u);
    EXPECT_NEAR(m.at(0, 0), 0.0, 1e-12);
}

TEST(SimilarityMatrix, TwoByThreeCellByCell)
{
    auto u1 = unit("r", {"r1", "r2"}, {{1, 0}, {1, 1}});
    auto u2 = unit("c", {"c1", "c2", "c3"}, {{0, 1}, {2, 0}, {-1, -1}});
    auto m = similarity_matrix(u1, u2, cosine_similarity);
    double s = 1.0 / std::sqrt(2.0);
    double expected[2][3] = {{0, 1, -s}, {s, s, -1}};
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(m.at(r, c), expected[r][c], 1e-7);
    }
    auto t = similarity_matrix(u2, u1, cosine_similarity);
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(m.at(r, c), t.at(c, r), 1e-6);
    }
}

TEST(SimilarityMatrix, Errors)
{
    EXPECT_THROW(similarity_matrix(unit("a", {}, {}), unit("b", {"b"}, {{0, 1}}), cosine_similarity), AnalysisError);
    EXPECT_THROW(similarity_matrix(unit("a", {"a"}, {{1, 0, 0}}), unit("b", {"b"}, {{0, 1}}), cosine_similarity),
                 AnalysisError);
}

TEST(Heatmap, CsvLayoutAndRoundTrip)
{
    TempDir dir;
    SimilarityMatrix m{{"a", "b"}, {"a", "b"}, {1, 0, 0, 1}};
    export_heatmap(m, dir / "m.csv", HeatmapFormat::Csv);
    EXPECT_EQ(testing::read_file(dir / "m.csv"), ",a,b\na,1.000000,0.000000\nb,0.000000,1.000000\n");

    SimilarityMatrix odd{{"x,y", "say \"hi\""}, {"c"}, {0.1234567, -0.5}};
    export_heatmap(odd, dir / "odd.csv", HeatmapFormat::Csv);
    auto back = read_heatmap_csv(dir / "odd.csv");
    EXPECT_EQ(back.row_labels, odd.row_labels);
    EXPECT_EQ(back.col_labels, odd.col_labels);
    for (std::size_t i = 0; i < odd.values.size(); ++i) EXPECT_NEAR(back.values[i], odd.values[i], 1e-6);
}

TEST(Heatmap, SvgHasOneRectPerCell)
{
    TempDir dir;
    SimilarityMatrix m{{"r<1>", "r2"}, {"c1", "c2", "c3"}, {0, 0.5, 1, -1, 0.25, 0.75}};
    export_heatmap(m, dir / "m.svg", HeatmapFormat::Svg);
    auto svg = testing::read_file(dir / "m.svg");
    std::regex rect("<rect class=\"cell\"");
    auto count = std::distance(std::sregex_iterator(svg.begin(), svg.end(), rect), std::sregex_iterator());
    EXPECT_EQ(count, 6);
    EXPECT_NE(svg.find("r&lt;1&gt;"), std::string::npos);
    // Max value is black, min is white.
    EXPECT_NE(svg.find("fill=\"rgb(0,0,0)\""), std::string::npos);
    EXPECT_NE(svg.find("fill=\"rgb(255,255,255)\""), std::string::npos);
}

TEST(Heatmap, ShapeMismatchRejected)
{
    TempDir dir;
    SimilarityMatrix bad{{"a"}, {"b", "c"}, {1}};
    EXPECT_THROW(export_heatmap(bad, dir / "x.csv", HeatmapFormat::Csv), AnalysisError);
}

} // namespace
} // namespace wombat
