#include "wombat/phrases.hpp"

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "../phrase_oracle.hpp"
#include "../test_util.hpp"

namespace wombat {
namespace {

std::vector<Tokens> petri_corpus()
{
    std::vector<Tokens> corpus;
    for (int i = 0; i < 10; ++i) corpus.push_back({"petri", "net"});
    for (int i = 0; i < 10; ++i) corpus.push_back({"net"});
    return corpus;
}

TEST(TrainPhrases, CountsBigramsAndUnigrams)
{
    auto model = train_phrase_model(petri_corpus(), {0.0, 1.0, 1});
    ASSERT_EQ(model.layers().size(), 1u);
    const auto& layer = model.layers()[0];
    EXPECT_EQ(layer.bigram("petri", "net"), 10u);
    EXPECT_EQ(layer.unigram("net"), 20u);
    EXPECT_EQ(layer.unigram("petri"), 10u);
    EXPECT_EQ(layer.token_count, 30u);
    // Oracle: (10 - 0) * 30 / (10 * 20)
    EXPECT_DOUBLE_EQ(*model.score(0, "petri", "net"), 1.5);
    EXPECT_FALSE(model.score(0, "net", "petri").has_value());
}

TEST(ApplyPhrasesModel, JoinsAboveThreshold)
{
    std::vector<Tokens> corpus = petri_corpus();
    for (int i = 0; i < 5; ++i) corpus.push_back({"analysis"});
    auto model = train_phrase_model(corpus, {0.0, 1.0, 1});
    EXPECT_EQ(apply_phrases_model(model, {"petri", "net", "analysis"}), (Tokens{"petri_net", "analysis"}));
    EXPECT_EQ(apply_phrases_model(model, {}), Tokens{});
    EXPECT_EQ(apply_phrases_model(model, {"analysis", "petri"}), (Tokens{"analysis", "petri"}));
}

TEST(ApplyPhrasesModel, ThresholdIsInclusive)
{
    // Score of (petri, net) is exactly 1.5.
    EXPECT_EQ(apply_phrases_model(train_phrase_model(petri_corpus(), {0.0, 1.5, 1}), {"petri", "net"}),
              Tokens{"petri_net"});
    EXPECT_EQ(apply_phrases_model(train_phrase_model(petri_corpus(), {0.0, 1.51, 1}), {"petri", "net"}),
              (Tokens{"petri", "net"}));
}

TEST(ApplyPhrasesModel, LargeDeltaJoinsNothing)
{
    auto model = train_phrase_model(petri_corpus(), {11.0, 0.0, 1});
    EXPECT_EQ(apply_phrases_model(model, {"petri", "net", "petri", "net"}), (Tokens{"petri", "net", "petri", "net"}));
}

TEST(ApplyPhrasesModel, TwoPassesBuildTrigram)
{
    std::vector<Tokens> corpus;
    for (int i = 0; i < 20; ++i) corpus.push_back({"new", "york", "city"});
    for (int i = 0; i < 20; ++i) corpus.push_back({"x" + std::to_string(i), "y" + std::to_string(i)});
    PhraseParams params{0.0, 2.0, 2};
    auto model = train_phrase_model(corpus, params);
    // Two-pass simulation: pass 1 joins new_york (the leftmost pair), pass 2
    // sees [new_york, city] twenty times and joins it.
    testing::PhraseOracle oracle(corpus, {0, 8, 2});
    EXPECT_EQ(oracle.apply({"new", "york", "city"}), Tokens{"new_york_city"});
    EXPECT_EQ(apply_phrases_model(model, {"new", "york", "city"}), Tokens{"new_york_city"});
    auto one_pass = train_phrase_model(corpus, {0.0, 2.0, 1});
    EXPECT_EQ(apply_phrases_model(one_pass, {"new", "york", "city"}), (Tokens{"new_york", "city"}));
}

TEST(PhraseModel, SerializationRoundTrip)
{
    std::vector<Tokens> corpus{{"a", "b", "c"}, {"a", "b"}, {"c", "a", "b"}, {"spaces are", "100%"}};
    auto model = train_phrase_model(corpus, {0.5, 0.25, 2});
    auto text = model.serialize();
    auto back = PhraseModel::deserialize(text);
    EXPECT_EQ(back, model);
    EXPECT_EQ(back.serialize(), text);
    EXPECT_EQ(back.content_hash(), model.content_hash());

    testing::TempDir dir;
    model.save(dir / "m.model");
    EXPECT_EQ(PhraseModel::load(dir / "m.model"), model);
}

TEST(PhraseModel, RejectsCorruptText)
{
    EXPECT_ANY_THROW(PhraseModel::deserialize("garbage\n"));
    auto text = train_phrase_model(petri_corpus(), {}).serialize();
    EXPECT_ANY_THROW(PhraseModel::deserialize(text.substr(0, text.size() / 2)));
}

TEST(ApplyPhrasesVocab, PetriNet)
{
    std::set<std::string> vocab{"petri_net", "net", "petri"};
    auto in = [&](std::string_view w) { return vocab.count(std::string(w)) > 0; };
    EXPECT_EQ(apply_phrases_vocab(in, {"petri", "net"}), Tokens{"petri_net"});
    vocab.erase("petri_net");
    EXPECT_EQ(apply_phrases_vocab(in, {"petri", "net"}), (Tokens{"petri", "net"}));
}

TEST(ApplyPhrasesVocab, LongestMatchWins)
{
    std::set<std::string> vocab{"a_b_c", "a_b"};
    auto in = [&](std::string_view w) { return vocab.count(std::string(w)) > 0; };
    EXPECT_EQ(apply_phrases_vocab(in, {"a", "b", "c"}, 3), Tokens{"a_b_c"});
    EXPECT_EQ(apply_phrases_vocab(in, {"a", "b", "c"}, 2), (Tokens{"a_b", "c"}));
}

// Exhaustive oracle: at each position try every window length from the
// longest down, on random inputs over a tiny alphabet.
TEST(ApplyPhrasesVocab, MatchesWindowOracle)
{
    std::mt19937 rng(5);
    const std::vector<std::string> alphabet{"a", "b", "c"};
    for (int trial = 0; trial < 300; ++trial) {
        std::set<std::string> vocab;
        for (int v = 0; v < 6; ++v) {
            int len = std::uniform_int_distribution<int>(2, 4)(rng);
            std::string w;
            for (int k = 0; k < len; ++k) w += (k ? "_" : "") + alphabet[rng() % 3];
            vocab.insert(w);
        }
        Tokens tokens;
        for (int k = std::uniform_int_distribution<int>(0, 9)(rng); k > 0; --k) tokens.push_back(alphabet[rng() % 3]);
        int max_len = std::uniform_int_distribution<int>(2, 4)(rng);

        Tokens expected;
        for (std::size_t i = 0; i < tokens.size();) {
            std::size_t take = 1;
            for (std::size_t len = 2; len <= static_cast<std::size_t>(max_len) && i + len <= tokens.size(); ++len) {
                std::string w = tokens[i];
                for (std::size_t k = 1; k < len; ++k) w += "_" + tokens[i + k];
                if (vocab.count(w)) take = len;
            }
            std::string w = tokens[i];
            for (std::size_t k = 1; k < take; ++k) w += "_" + tokens[i + k];
            expected.push_back(w);
            i += take;
        }
        auto in = [&](std::string_view w) { return vocab.count(std::string(w)) > 0; };
        ASSERT_EQ(apply_phrases_vocab(in, tokens, max_len), expected);
    }
}

std::string concat(const Tokens& tokens)
{
    std::string out;
    for (const auto& t : tokens) out += t + "_";
    return out;
}

TEST(PhraseProperties, NoMaterialLossAndOracleAgreement)
{
    std::mt19937 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Tokens> corpus;
        int vocab = std::uniform_int_distribution<int>(2, 6)(rng);
        for (int s = std::uniform_int_distribution<int>(1, 15)(rng); s > 0; --s) {
            Tokens sentence;
            for (int k = std::uniform_int_distribution<int>(1, 8)(rng); k > 0; --k) {
                sentence.push_back("w" + std::to_string(rng() % vocab));
            }
            corpus.push_back(sentence);
        }
        testing::OracleParams op{std::uniform_int_distribution<int>(0, 4)(rng),
                                 std::uniform_int_distribution<int>(0, 12)(rng), 1 + static_cast<int>(rng() % 3)};
        auto model = train_phrase_model(corpus, {op.delta(), op.threshold(), op.passes});
        testing::PhraseOracle oracle(corpus, op);
        for (const auto& sentence : corpus) {
            auto joined = apply_phrases_model(model, sentence);
            ASSERT_EQ(joined, oracle.apply(sentence));
            // Joining only merges neighbours: the concatenation is unchanged.
            ASSERT_EQ(concat(joined), concat(sentence));
            ASSERT_LE(joined.size(), sentence.size());
        }
    }
}

} // namespace
} // namespace wombat
