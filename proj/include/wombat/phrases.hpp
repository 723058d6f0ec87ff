#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wombat/pipeline.hpp"

namespace wombat {

struct PairHash {
    std::size_t operator()(const std::pair<std::string, std::string>& p) const noexcept
    {
        auto h1 = std::hash<std::string>{}(p.first);
        auto h2 = std::hash<std::string>{}(p.second);
        return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
    }
};

/// Unigram and bigram statistics gathered in one training pass.
struct PhraseLayer {
    std::unordered_map<std::string, std::uint64_t> unigram_counts;
    std::unordered_map<std::pair<std::string, std::string>, std::uint64_t, PairHash> bigram_counts;
    std::uint64_t token_count = 0;

    std::uint64_t unigram(const std::string& word) const;
    std::uint64_t bigram(const std::string& a, const std::string& b) const;

    friend bool operator==(const PhraseLayer&, const PhraseLayer&) = default;
};

struct PhraseParams {
    double delta = 0.0;
    double threshold = 10.0;
    int passes = 1;
};

/// Bigram collocation model for joining adjacent tokens into `a_b` phrases.
///
/// A pair (a, b) with a non-zero bigram count is joined when
///
///     (count(ab) - delta) * N / (count(a) * count(b)) >= threshold
///
/// where N is the number of tokens seen in that pass. Pass k+1 is trained on
/// the corpus as rewritten by passes 1..k, so `passes` passes can build
/// phrases of up to passes+1 tokens.
class PhraseModel {
public:
    PhraseModel() = default;
    PhraseModel(std::vector<PhraseLayer> layers, PhraseParams params);

    const std::vector<PhraseLayer>& layers() const noexcept { return layers_; }
    double delta() const noexcept { return params_.delta; }
    double threshold() const noexcept { return params_.threshold; }
    int passes() const noexcept { return static_cast<int>(layers_.size()); }
    static constexpr std::string_view delimiter() { return "_"; }

    /// Score of (a, b) in `layer`; nullopt when the bigram was never seen.
    std::optional<double> score(std::size_t layer, const std::string& a, const std::string& b) const;

    /// Line-oriented text form, entries sorted. Tokens have `%`, space, tab, CR
    /// and LF percent-encoded.
    std::string serialize() const;
    static PhraseModel deserialize(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static PhraseModel load(const std::filesystem::path& path);
    std::string content_hash() const;

    friend bool operator==(const PhraseModel& a, const PhraseModel& b)
    {
        return a.params_.delta == b.params_.delta && a.params_.threshold == b.params_.threshold &&
               a.layers_ == b.layers_;
    }

private:
    std::vector<PhraseLayer> layers_;
    PhraseParams params_;
};

/// Replays the corpus once per call, handing each tokenized sentence to the
/// visitor. Training calls it once per pass.
using CorpusSource = std::function<void(const std::function<void(const Tokens&)>&)>;

PhraseModel train_phrase_model(const CorpusSource& corpus, PhraseParams params = {});
PhraseModel train_phrase_model(std::span<const Tokens> corpus, PhraseParams params = {});

/// Left-to-right greedy pair joining, once per trained pass.
Tokens apply_phrases_model(const PhraseModel& model, const Tokens& tokens);

/// Greedy longest match: at each position the longest window of at most
/// `max_len` tokens whose `_`-join is in the vocabulary becomes one token.
Tokens apply_phrases_vocab(const std::function<bool(std::string_view)>& in_vocabulary, const Tokens& tokens,
                           int max_len = 4);

} // namespace wombat
