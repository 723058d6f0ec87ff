#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "wombat/catalog.hpp"
#include "wombat/phrases.hpp"
#include "wombat/pipeline.hpp"
#include "wombat/store.hpp"

namespace wombat {

/// Result for one input unit against one WEC.
///
/// `words[i]` is the exact lookup key of `vectors[i]`. With `as_tuple`
/// disabled `words` is left empty and only the vectors are returned.
struct UnitResult {
    std::string raw;
    Tokens tokens;
    std::vector<std::string> words;
    std::vector<Vector> vectors;
    std::vector<std::string> missing;

    friend bool operator==(const UnitResult&, const UnitResult&) = default;
};

struct WecResult {
    std::string identifier;
    std::vector<UnitResult> units;

    friend bool operator==(const WecResult&, const WecResult&) = default;
};

/// One entry per expanded WEC, in query order.
struct RetrievalResult {
    std::vector<WecResult> per_wec;

    friend bool operator==(const RetrievalResult&, const RetrievalResult&) = default;
};

/// A raw line (raw retrieval) or an already tokenized unit.
using InputUnit = std::variant<std::string, Tokens>;

struct RetrievalOptions {
    bool raw = false;
    /// Keep one pair per token occurrence, in token order.
    bool in_order = false;
    bool as_tuple = true;
    /// Apply the WEC's level-2 phrase joining to raw input.
    bool phrases = true;
};

/// `{"results":[{"identifier":...,"units":[{"raw":...,"tokens":[...],
/// "pairs":[[word,[floats]],...] | "vectors":[[floats],...],"missing":[...]}]}]}`
nlohmann::json to_json(const RetrievalResult& result);
RetrievalResult retrieval_from_json(const nlohmann::json& doc);

/// Entry point over one catalog root: import, lazy store access, and
/// multi-WEC retrieval with per-WEC preprocessing.
class Connector {
public:
    explicit Connector(std::filesystem::path root, bool create_if_missing = false);
    ~Connector();

    Catalog& catalog() noexcept { return catalog_; }
    const Catalog& catalog() const noexcept { return catalog_; }

    /// Registers `identifier` and imports `file` into its store. On failure
    /// the registration is rolled back. `pipeline` defaults to
    /// PipelineDescriptor::for_identifier.
    ImportReport import_from_file(const std::filesystem::path& file, std::string_view identifier,
                                  const ImportOptions& options = {},
                                  const std::optional<PipelineDescriptor>& pipeline = std::nullopt,
                                  const PhraseModel* phrase_model = nullptr);

    /// The opened store of an imported WEC (opened once, then shared).
    const Store& store(const WecIdentifier& id) const;

    /// Level 1 (through `cache`) followed by the WEC's level-2 joining.
    Tokens preprocess(const WecIdentifier& id, std::string_view raw, PreprocessCache* cache, bool phrases = true) const;

    Tokens apply_phrases_vocab(const WecIdentifier& id, const Tokens& tokens, int max_len) const;

    RetrievalResult get_vectors(std::string_view query, PreprocessCache& cache, const std::vector<InputUnit>& inputs,
                                const RetrievalOptions& options = {}) const;

private:
    struct OpenWec;
    const OpenWec& open(const WecIdentifier& id) const;

    Catalog catalog_;
    mutable std::mutex open_mutex_;
    mutable std::map<std::string, std::unique_ptr<OpenWec>> open_;
    mutable std::vector<std::unique_ptr<OpenWec>> retired_;
};

} // namespace wombat
