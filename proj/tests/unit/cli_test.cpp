#include "cli.hpp"

#include <sstream>

#include <gtest/gtest.h>
#include "json.hpp"

#include "../fixtures.hpp"
#include "../test_util.hpp"
#include "wombat/analyse.hpp"
#include "wombat/retrieve.hpp"

namespace wombat {
namespace {

using testing::TempDir;
using testing::write_file;
using testing::write_wec_text;

const char* kId = "algo:t;dataset:d;dims:4;fold:1;unit:token";

class CliTest : public ::testing::Test {
protected:
    int run(std::vector<std::string> args)
    {
        args.insert(args.begin(), {"wombat", "--root", (dir_ / "root").string(), "--create"});
        out_.str("");
        err_.str("");
        return cli::run(args, out_, err_);
    }

    std::string out() const { return out_.str(); }
    std::string err() const { return err_.str(); }

    TempDir dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

TEST_F(CliTest, ImportReportsCounts)
{
    auto file = write_wec_text(dir_ / "five.txt", {"a", "b", "c", "d", "e"}, 4);
    ASSERT_EQ(run({"import", file.string(), kId}), cli::kOk) << err();
    EXPECT_NE(out().find("imported: 5"), std::string::npos) << out();
    EXPECT_NE(out().find("ratio"), std::string::npos);

    ASSERT_EQ(run({"--format", "json", "list"}), cli::kOk);
    auto doc = nlohmann::json::parse(out());
    ASSERT_EQ(doc.size(), 1u);
    EXPECT_EQ(doc[0]["identifier"], kId);
    EXPECT_EQ(doc[0]["vocab_size"], 5);
}

TEST_F(CliTest, ImportErrors)
{
    auto file = write_wec_text(dir_ / "five.txt", {"a", "b"}, 4);
    EXPECT_EQ(run({"import", file.string(), "algo:t;dataset:d;dims:4;fold:1"}), cli::kGrammar);
    EXPECT_NE(err().find("unit"), std::string::npos) << err();
    ASSERT_EQ(run({"import", file.string(), kId}), cli::kOk) << err();
    EXPECT_EQ(run({"import", file.string(), "unit:token;fold:1;dims:4;dataset:d;algo:t"}), cli::kCatalog);
    EXPECT_NE(err().find("already registered"), std::string::npos) << err();
    auto dup = write_file(dir_ / "dup.txt", "x 1 2 3 4\nx 1 2 3 4\n");
    EXPECT_EQ(run({"import", dup.string(), "algo:u;dataset:d;dims:4;fold:1;unit:token"}), cli::kStore);
    EXPECT_NE(err().find("'x'"), std::string::npos) << err();
    EXPECT_EQ(run({"import", dup.string(), "algo:u;dataset:d;dims:4;fold:1;unit:token", "--on-duplicate",
                   "keep-first"}),
              cli::kOk);
    EXPECT_NE(out().find("skipped_duplicates: 1"), std::string::npos) << out();
}

TEST_F(CliTest, UsageErrors)
{
    EXPECT_EQ(run({"frobnicate"}), cli::kUsage);
    EXPECT_EQ(run({"import"}), cli::kUsage);
    std::ostringstream o, e;
    EXPECT_EQ(cli::run({"wombat", "list"}, o, e), cli::kUsage);
}

TEST_F(CliTest, VectorsJsonRoundTrips)
{
    auto file = write_wec_text(dir_ / "w.txt", {"theory", "computation"}, 4);
    ASSERT_EQ(run({"import", file.string(), kId}), cli::kOk) << err();
    ASSERT_EQ(run({"--format", "json", "vectors", kId, "theory", "computation", "nope"}), cli::kOk) << err();
    auto first = retrieval_from_json(nlohmann::json::parse(out()));
    ASSERT_EQ(first.per_wec.size(), 1u);
    EXPECT_EQ(first.per_wec[0].units[0].words, (std::vector<std::string>{"theory", "computation"}));
    EXPECT_EQ(first.per_wec[0].units[0].vectors[0], testing::synthetic_vector("theory", 4));
    EXPECT_EQ(first.per_wec[0].units[0].missing, std::vector<std::string>{"nope"});
    EXPECT_EQ(nlohmann::json::parse(to_json(first).dump()), nlohmann::json::parse(out()));
}

TEST_F(CliTest, VectorsOnUnknownWec)
{
    EXPECT_EQ(run({"vectors", kId, "theory"}), cli::kCatalog);
}

TEST_F(CliTest, StsWritesRankingPerWec)
{
    auto words = std::vector<std::string>{"theory", "of", "computation", "petri", "nets", "graph"};
    auto a = write_wec_text(dir_ / "a.txt", words, 4);
    auto b = write_wec_text(dir_ / "b.txt", words, 6);
    ASSERT_EQ(run({"import", a.string(), kId}), cli::kOk) << err();
    ASSERT_EQ(run({"import", b.string(), "algo:t;dataset:d;dims:6;fold:1;unit:token"}), cli::kOk) << err();
    auto tsv = write_file(dir_ / "pairs.tsv", "Theory of computation\tPetri nets\n"
                                              "graph theory\tgraph theory\n"
                                              "of the\tPetri\n");
    auto out_dir = dir_ / "rank";
    ASSERT_EQ(run({"sts", "algo:t;dataset:d;dims:{4,6};fold:1;unit:token", tsv.string(), "--out-dir",
                   out_dir.string()}),
              cli::kOk)
        << err();
    auto id = parse_identifier(kId);
    auto ranking = testing::read_file(out_dir / (id.directory_name() + ".tsv"));
    EXPECT_EQ(ranking.rfind("0.000000\tgraph theory\tgraph theory\n", 0), 0u) << ranking;
    EXPECT_EQ(std::count(ranking.begin(), ranking.end(), '\n'), 2);
    auto summary = nlohmann::json::parse(testing::read_file(out_dir / "sts-summary.json"));
    EXPECT_EQ(summary["wecs"].size(), 2u);
    EXPECT_EQ(summary["wecs"][0]["undefined_pairs"], nlohmann::json::array({2}));
    EXPECT_GT(summary["cache"]["hits"].get<int>(), 0);
    EXPECT_EQ(summary["stopwords"]["id"], "english-v1");
}

TEST_F(CliTest, StsRejectsEmptyAndMalformedInput)
{
    auto file = write_wec_text(dir_ / "a.txt", {"x"}, 4);
    ASSERT_EQ(run({"import", file.string(), kId}), cli::kOk) << err();
    auto empty = write_file(dir_ / "empty.tsv", "");
    EXPECT_NE(run({"sts", kId, empty.string(), "--out-dir", (dir_ / "o").string()}), cli::kOk);
    EXPECT_NE(err().find("empty input"), std::string::npos) << err();
    auto bad = write_file(dir_ / "bad.tsv", "a\tb\nno tab here\n");
    EXPECT_NE(run({"sts", kId, bad.string(), "--out-dir", (dir_ / "o").string()}), cli::kOk);
    EXPECT_NE(err().find(":2:"), std::string::npos) << err();
}

TEST_F(CliTest, HeatmapPhrasesOnAndOff)
{
    auto file = write_wec_text(dir_ / "w.txt", {"petri_net", "petri", "net", "nets", "theory", "analysis", "of"}, 4);
    ASSERT_EQ(run({"import", file.string(), kId, "--phrases", "vocab"}), cli::kOk) << err();
    auto on = dir_ / "on";
    auto off = dir_ / "off";
    const std::string s1 = "Analysis of Petri net theory";
    const std::string s2 = "Theory of Petri nets";
    ASSERT_EQ(run({"heatmap", kId, s1, s2, "--out-dir", on.string(), "--format", "both"}), cli::kOk) << err();
    ASSERT_EQ(run({"heatmap", kId, s1, s2, "--out-dir", off.string(), "--no-phrases"}), cli::kOk) << err();
    auto name = parse_identifier(kId).directory_name();
    auto with = read_heatmap_csv(on / (name + ".csv"));
    auto without = read_heatmap_csv(off / (name + ".csv"));
    EXPECT_EQ(with.row_labels, (std::vector<std::string>{"analysis", "of", "petri_net", "theory"}));
    EXPECT_EQ(without.row_labels, (std::vector<std::string>{"analysis", "of", "petri", "net", "theory"}));
    EXPECT_TRUE(std::filesystem::exists(on / (name + ".svg")));
}

TEST_F(CliTest, TrainAndAttachPhraseModel)
{
    auto file = write_wec_text(dir_ / "w.txt", {"petri_net", "theory"}, 4);
    ASSERT_EQ(run({"import", file.string(), kId}), cli::kOk) << err();
    std::string corpus;
    for (int i = 0; i < 10; ++i) corpus += "Petri net\nTheory\n";
    auto c = write_file(dir_ / "corpus.txt", corpus);
    ASSERT_EQ(run({"train-phrases", c.string(), "--threshold", "1", "--attach", kId}), cli::kOk) << err();
    ASSERT_EQ(run({"--format", "json", "vectors", kId, "--raw", "Petri net theory"}), cli::kOk) << err();
    auto result = retrieval_from_json(nlohmann::json::parse(out()));
    EXPECT_EQ(result.per_wec[0].units[0].tokens, (Tokens{"petri_net", "theory"}));
}

TEST_F(CliTest, RemoveNeedsForce)
{
    auto file = write_wec_text(dir_ / "w.txt", {"a"}, 4);
    ASSERT_EQ(run({"import", file.string(), kId}), cli::kOk) << err();
    EXPECT_EQ(run({"remove", kId}), cli::kCatalog);
    EXPECT_EQ(run({"remove", kId, "--force"}), cli::kOk) << err();
    EXPECT_EQ(run({"list"}), cli::kOk);
    EXPECT_EQ(out(), "");
}

} // namespace
} // namespace wombat
