#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "wombat/identifier.hpp"
#include "wombat/stopwords.hpp"

namespace wombat {

using Tokens = std::vector<std::string>;

// Level-1 stages. Every stage maps the current token list to a new one; the
// pipeline starts from the raw line as a single token (none for a blank line).

/// `default`: split on Unicode whitespace, then peel leading and trailing
/// ASCII punctuation off into one-character tokens. `whitespace`: split only.
struct TokenizeStage {
    std::string rules = "default";
};

/// Lowercases ASCII, Latin-1, Greek and Cyrillic capitals.
struct CaseFoldStage {
    bool on = false;
};

/// Porter stemming of lowercase ASCII tokens.
struct StemStage {
    bool on = false;
};

/// Drops listed tokens; `list == nullopt` means off.
struct StopwordStage {
    std::optional<StopwordList> list;
};

/// `default` drops tokens made only of ASCII punctuation; `off` is a no-op.
struct StripSpecialStage {
    std::string rules = "off";
};

/// Pipes the current tokens (joined by single spaces) through `/bin/sh -c
/// command`: one line on stdin, one line of whitespace-separated tokens on
/// stdout.
struct ExternalStage {
    std::string command;
    /// SHA-256 over the command string and every argument naming a file.
    std::string content_hash;

    /// Builds the stage and records the current content hash.
    static ExternalStage make(std::string command);
};

using Stage = std::variant<TokenizeStage, CaseFoldStage, StemStage, StopwordStage, StripSpecialStage, ExternalStage>;

std::string_view stage_name(const Stage& stage);

/// Level-2 configuration: joining adjacent tokens into `_`-phrases.
struct PhraseConfig {
    enum class Mode { Off, Model, Vocab };
    Mode mode = Mode::Off;
    /// Content hash of the bound PhraseModel (Model mode).
    std::string model_hash;
    /// Longest window tried by vocabulary joining (Vocab mode).
    int max_len = 4;

    friend bool operator==(const PhraseConfig&, const PhraseConfig&) = default;
};

/// Ordered, hashed preprocessing recipe bound to one WEC.
///
/// The serialized form is canonical compact JSON:
/// `{"phrases":{...},"stages":[{"stage":"tokenize","rules":"default"},...],"version":1}`.
/// Stopword lists are embedded word by word so the descriptor is
/// self-contained.
class PipelineDescriptor {
public:
    PipelineDescriptor();
    explicit PipelineDescriptor(std::vector<Stage> stages, PhraseConfig phrases = {});

    /// tokenize(default), case_fold(fold == 1), stem(unit == stem).
    static PipelineDescriptor for_identifier(const WecIdentifier& id);

    static PipelineDescriptor deserialize(std::string_view text);

    const std::vector<Stage>& stages() const noexcept { return stages_; }
    const PhraseConfig& phrases() const noexcept { return phrases_; }

    /// Effective flags: any enabled stage of the kind counts.
    bool case_fold() const;
    bool stem() const;

    /// Throws PipelineError unless case_fold matches `fold` and stem matches
    /// `unit == stem`.
    void validate_for(const WecIdentifier& id) const;

    PipelineDescriptor with_phrases(PhraseConfig phrases) const;

    const std::string& serialized() const noexcept { return serialized_; }
    /// Hash over everything, including the phrase configuration.
    const std::string& hash() const noexcept { return hash_; }
    /// Hash over the level-1 stages only; the preprocess cache key.
    const std::string& stages_hash() const noexcept { return stages_hash_; }

    friend bool operator==(const PipelineDescriptor& a, const PipelineDescriptor& b)
    {
        return a.serialized_ == b.serialized_;
    }

private:
    void seal();

    std::vector<Stage> stages_;
    PhraseConfig phrases_;
    std::string serialized_;
    std::string hash_;
    std::string stages_hash_;
};

/// Memo of level-1 output keyed by (stages hash, raw line). Thread-safe.
class PreprocessCache {
public:
    PreprocessCache() = default;
    PreprocessCache(const PreprocessCache&) = delete;
    PreprocessCache& operator=(const PreprocessCache&) = delete;

    /// Returns the cached tokens or computes, stores and returns them.
    Tokens get_or_compute(const std::string& pipeline_hash, std::string_view raw,
                          const std::function<Tokens()>& compute);

    std::size_t hits() const noexcept { return hits_.load(); }
    std::size_t misses() const noexcept { return misses_.load(); }
    std::size_t size() const;
    void clear();

private:
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, Tokens> entries_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

/// Runs the level-1 stages of `pipeline` on `raw`, in declared order.
Tokens run_pipeline(const PipelineDescriptor& pipeline, std::string_view raw, PreprocessCache* cache = nullptr);

// Building blocks, exposed for reuse and testing.
Tokens tokenize(std::string_view text, std::string_view rules = "default");
std::string case_fold(std::string_view token);
bool is_punctuation_token(std::string_view token);

} // namespace wombat
