#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wombat {

using Vector = std::vector<float>;

enum class DuplicatePolicy { Reject, KeepFirst };
enum class HeaderMode { Auto, Yes, No };

struct ImportOptions {
    DuplicatePolicy on_duplicate = DuplicatePolicy::Reject;
    HeaderMode expect_header = HeaderMode::Auto;
    /// When false, malformed lines are recorded in the report and skipped
    /// instead of aborting the import.
    bool strict = true;
};

struct MalformedLine {
    std::size_t line = 0;
    std::string reason;
};

struct ImportReport {
    std::size_t imported = 0;
    std::size_t skipped_duplicates = 0;
    std::vector<MalformedLine> malformed_lines;
    bool header = false;
    std::chrono::duration<double> elapsed{};
    std::uintmax_t bytes_text = 0;
    std::uintmax_t bytes_store = 0;

    /// Data lines seen, header and blank lines excluded.
    std::size_t total_lines() const { return imported + skipped_duplicates + malformed_lines.size(); }
};

/// Builds a store file next to its final location and renames it into place
/// on commit(), so readers see either nothing or the complete store.
class StoreWriter {
public:
    StoreWriter(std::filesystem::path final_path, int dims);
    ~StoreWriter();
    StoreWriter(const StoreWriter&) = delete;
    StoreWriter& operator=(const StoreWriter&) = delete;

    /// Returns false (and stores nothing) when `word` is already present.
    bool add(std::string_view word, std::span<const float> vector);
    std::size_t size() const noexcept;
    void commit();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Parses a plain-text embedding file (word followed by `dims` floats per
/// line, single spaces, optional `count dims` header) into a new store at
/// `store_path`. Floats are rounded to nearest binary32.
ImportReport import_text_file(const std::filesystem::path& text_file, const std::filesystem::path& store_path,
                              int dims, const ImportOptions& options = {});

struct BatchLookup {
    std::vector<std::pair<std::string, Vector>> found;
    std::vector<std::string> missing;
};

/// Read-only handle on one WEC's store: a single SQLite file holding a
/// `word TEXT UNIQUE` column and a little-endian float32 BLOB per word.
/// Lookups go through the unique index; nothing is loaded eagerly.
/// Safe for concurrent readers.
class Store {
public:
    static constexpr std::string_view kFileName = "vectors.sqlite";

    explicit Store(const std::filesystem::path& path);
    ~Store();
    Store(Store&&) noexcept;
    Store& operator=(Store&&) noexcept;

    int dims() const noexcept;
    std::size_t vocab_size() const noexcept;
    const std::filesystem::path& path() const noexcept;

    std::optional<Vector> get_vector(std::string_view word) const;
    /// One entry per distinct found word in first-occurrence order; missing
    /// words distinct, in input order.
    BatchLookup get_vectors_batch(std::span<const std::string> words) const;
    bool contains(std::string_view word) const;
    /// Streams every word through `visit` without materializing the vocabulary.
    void iterate_vocab(const std::function<void(std::string_view)>& visit) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace wombat
