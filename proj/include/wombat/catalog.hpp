#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "wombat/identifier.hpp"
#include "wombat/phrases.hpp"
#include "wombat/pipeline.hpp"

namespace wombat {

struct CatalogEntry {
    WecIdentifier identifier;
    int dims = 0;
    std::size_t vocab_size = 0;
    PipelineDescriptor pipeline;
    /// File name of the bound phrase model inside the WEC directory.
    std::optional<std::string> phrase_model_ref;
    std::string created_at;
    std::string source_file;
    /// WEC directory, relative to the catalog root.
    std::string directory;

    const std::string& pipeline_hash() const { return pipeline.hash(); }

    friend bool operator==(const CatalogEntry&, const CatalogEntry&) = default;
};

/// Registry of WECs under one root directory.
///
/// Layout:
///
///     <root>/catalog.manifest          one record per WEC (see below)
///     <root>/<directory_name>/         self-describing WEC directory
///         vectors.sqlite               the store
///         wec.info                     copy of the manifest record
///         phrases.model                optional trained phrase model
///
/// The manifest is line-oriented text. A `# wombat catalog manifest v1`
/// comment line is followed by one `[wec]` block per WEC, blocks sorted by
/// normalized identifier, each holding `key=value` lines in fixed order:
/// identifier, dims, vocab_size, pipeline_hash, pipeline, phrase_model
/// (`-` when absent), created_at, source_file, directory. Backslashes and
/// newlines in values are escaped as `\\` and `\n`.
///
/// Readers work on an in-memory snapshot; writers take an exclusive file
/// lock, re-read the manifest, apply their change and atomically replace
/// the file, so a reader never sees a half-written entry.
class Catalog {
public:
    static constexpr std::string_view kManifestName = "catalog.manifest";

    explicit Catalog(std::filesystem::path root, bool create_if_missing = false);

    const std::filesystem::path& root() const noexcept { return root_; }

    /// Throws CatalogError naming the existing entry if `id` is taken, and
    /// PipelineError if the pipeline disagrees with the identifier's
    /// fold/unit. A phrase model given here is written into the WEC
    /// directory and bound in the pipeline.
    CatalogEntry register_wec(const WecIdentifier& id, const PipelineDescriptor& pipeline,
                              const PhraseModel* phrase_model, const std::string& source);

    std::optional<CatalogEntry> lookup(const WecIdentifier& id) const;

    /// Entries whose identifier contains every filter pair, ascending by
    /// normalized identifier.
    std::vector<CatalogEntry> list_entries(const AttributeMap& filter = {}) const;

    void set_vocab_size(const WecIdentifier& id, std::size_t vocab_size);

    /// Binds `model` to an existing WEC (Model mode); the pipeline hash changes.
    CatalogEntry attach_phrase_model(const WecIdentifier& id, const PhraseModel& model);

    /// Removes the entry and its directory. Refused unless `force`.
    void remove(const WecIdentifier& id, bool force);

    std::filesystem::path wec_directory(const CatalogEntry& entry) const { return root_ / entry.directory; }
    std::filesystem::path store_path(const CatalogEntry& entry) const;
    PhraseModel load_phrase_model(const CatalogEntry& entry) const;

    /// Re-reads the manifest from disk.
    void reload();

    /// The manifest text for the current snapshot.
    std::string manifest_text() const;

private:
    template <typename F>
    auto modify(F&& change);

    std::map<std::string, CatalogEntry> read_manifest() const;
    void write_manifest(const std::map<std::string, CatalogEntry>& entries) const;

    std::filesystem::path root_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, CatalogEntry> entries_;
};

} // namespace wombat
