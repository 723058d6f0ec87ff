#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wombat {

/// A named, content-hashed stopword set.
class StopwordList {
public:
    StopwordList() = default;
    StopwordList(std::string id, std::vector<std::string> words);

    /// The pinned built-in English list (id `english-v1`).
    static const StopwordList& english();

    /// UTF-8 file, one token per line; blank lines and surrounding
    /// whitespace are ignored. The id is the file stem.
    static StopwordList load(const std::filesystem::path& path);

    const std::string& id() const noexcept { return id_; }
    /// Sorted, unique.
    const std::vector<std::string>& words() const noexcept { return words_; }
    bool contains(std::string_view word) const;
    bool empty() const noexcept { return words_.empty(); }
    /// SHA-256 over the sorted words joined by newlines.
    const std::string& content_hash() const noexcept { return hash_; }

private:
    std::string id_;
    std::vector<std::string> words_;
    std::string hash_;
};

} // namespace wombat
