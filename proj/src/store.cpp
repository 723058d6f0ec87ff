#include "wombat/store.hpp"

#include <atomic>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <mutex>
#include <unordered_set>

#include <sqlite3.h>
#include <unistd.h>

#include "text_util.hpp"
#include "wombat/error.hpp"

namespace wombat {

namespace fs = std::filesystem;

namespace {

struct SqliteCloser {
    void operator()(sqlite3* db) const { sqlite3_close_v2(db); }
};
struct StatementFinalizer {
    void operator()(sqlite3_stmt* stmt) const { sqlite3_finalize(stmt); }
};
using DbHandle = std::unique_ptr<sqlite3, SqliteCloser>;
using Statement = std::unique_ptr<sqlite3_stmt, StatementFinalizer>;

[[noreturn]] void fail(sqlite3* db, const std::string& what)
{
    throw StoreError(what + ": " + (db ? sqlite3_errmsg(db) : "out of memory"));
}

void exec(sqlite3* db, const char* sql)
{
    char* message = nullptr;
    if (sqlite3_exec(db, sql, nullptr, nullptr, &message) != SQLITE_OK) {
        std::string text = message ? message : "unknown error";
        sqlite3_free(message);
        throw StoreError(std::string("sqlite: ") + text + " (in: " + sql + ")");
    }
}

Statement prepare(sqlite3* db, const char* sql)
{
    sqlite3_stmt* stmt = nullptr;
    if (sqlite3_prepare_v3(db, sql, -1, SQLITE_PREPARE_PERSISTENT, &stmt, nullptr) != SQLITE_OK) {
        fail(db, std::string("sqlite prepare '") + sql + "'");
    }
    return Statement(stmt);
}

// Vectors are stored as little-endian binary32 regardless of host order.
void encode_vector(std::span<const float> values, std::string& out)
{
    out.resize(values.size() * sizeof(float));
    std::memcpy(out.data(), values.data(), out.size());
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < out.size(); i += 4) {
            std::swap(out[i], out[i + 3]);
            std::swap(out[i + 1], out[i + 2]);
        }
    }
}

Vector decode_vector(const void* blob, std::size_t bytes)
{
    Vector values(bytes / sizeof(float));
    std::memcpy(values.data(), blob, values.size() * sizeof(float));
    if constexpr (std::endian::native == std::endian::big) {
        for (auto& v : values) {
            v = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(v)));
        }
    }
    return values;
}

std::string sqlite_uri(const fs::path& path)
{
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string uri = "file:";
    for (unsigned char c : fs::absolute(path).string()) {
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '/' || c == '-' ||
            c == '_' || c == '.' || c == '=') {
            uri += static_cast<char>(c);
        } else {
            uri += '%';
            uri += kHex[c >> 4];
            uri += kHex[c & 0xF];
        }
    }
    uri += "?mode=ro&immutable=1";
    return uri;
}

std::atomic<unsigned> g_temp_counter{0};

} // namespace

struct StoreWriter::Impl {
    fs::path final_path;
    fs::path temp_path;
    int dims = 0;
    DbHandle db;
    Statement insert;
    std::string blob;
    std::size_t count = 0;
    bool committed = false;
};

StoreWriter::StoreWriter(fs::path final_path, int dims) : impl_(std::make_unique<Impl>())
{
    if (dims <= 0) {
        throw StoreError("store dims must be positive");
    }
    impl_->final_path = std::move(final_path);
    impl_->dims = dims;
    impl_->temp_path = impl_->final_path;
    impl_->temp_path += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(g_temp_counter++);
    fs::remove(impl_->temp_path);

    sqlite3* raw = nullptr;
    int rc = sqlite3_open_v2(impl_->temp_path.c_str(), &raw,
                             SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX, nullptr);
    impl_->db.reset(raw);
    if (rc != SQLITE_OK) {
        fail(raw, "cannot create store '" + impl_->temp_path.string() + "'");
    }
    auto* db = impl_->db.get();
    // The temp file is discarded on any failure, so durability is only
    // needed at commit time.
    exec(db, "PRAGMA page_size=4096; PRAGMA journal_mode=OFF; PRAGMA synchronous=OFF;"
             "PRAGMA locking_mode=EXCLUSIVE; PRAGMA cache_size=-131072;");
    exec(db, "CREATE TABLE meta(key TEXT PRIMARY KEY, value TEXT NOT NULL);"
             "CREATE TABLE wec(word TEXT NOT NULL, vector BLOB NOT NULL);"
             "CREATE UNIQUE INDEX wec_word ON wec(word);");
    exec(db, "BEGIN");
    impl_->insert = prepare(db, "INSERT OR IGNORE INTO wec(word, vector) VALUES(?1, ?2)");
}

StoreWriter::~StoreWriter()
{
    if (impl_ && !impl_->committed) {
        impl_->insert.reset();
        impl_->db.reset();
        std::error_code ec;
        fs::remove(impl_->temp_path, ec);
    }
}

bool StoreWriter::add(std::string_view word, std::span<const float> vector)
{
    if (static_cast<int>(vector.size()) != impl_->dims) {
        throw StoreError("vector for '" + std::string(word) + "' has " + std::to_string(vector.size()) +
                         " values, store dims is " + std::to_string(impl_->dims));
    }
    encode_vector(vector, impl_->blob);
    auto* stmt = impl_->insert.get();
    sqlite3_bind_text(stmt, 1, word.data(), static_cast<int>(word.size()), SQLITE_STATIC);
    sqlite3_bind_blob(stmt, 2, impl_->blob.data(), static_cast<int>(impl_->blob.size()), SQLITE_STATIC);
    int rc = sqlite3_step(stmt);
    sqlite3_reset(stmt);
    if (rc != SQLITE_DONE) {
        fail(impl_->db.get(), "insert of '" + std::string(word) + "' failed");
    }
    if (sqlite3_changes(impl_->db.get()) == 0) {
        return false;
    }
    ++impl_->count;
    return true;
}

std::size_t StoreWriter::size() const noexcept { return impl_->count; }

void StoreWriter::commit()
{
    auto* db = impl_->db.get();
    auto meta = prepare(db, "INSERT INTO meta(key, value) VALUES(?1, ?2)");
    auto put = [&](const char* key, const std::string& value) {
        sqlite3_bind_text(meta.get(), 1, key, -1, SQLITE_STATIC);
        sqlite3_bind_text(meta.get(), 2, value.c_str(), -1, SQLITE_TRANSIENT);
        if (sqlite3_step(meta.get()) != SQLITE_DONE) {
            fail(db, "writing store metadata");
        }
        sqlite3_reset(meta.get());
    };
    put("format", "wombat-store-1");
    put("dims", std::to_string(impl_->dims));
    put("count", std::to_string(impl_->count));
    meta.reset();
    impl_->insert.reset();
    exec(db, "COMMIT");
    impl_->db.reset();

    if (fs::exists(impl_->final_path)) {
        throw StoreError("store '" + impl_->final_path.string() + "' already exists");
    }
    fs::rename(impl_->temp_path, impl_->final_path);
    impl_->committed = true;
}

ImportReport import_text_file(const fs::path& text_file, const fs::path& store_path, int dims,
                              const ImportOptions& options)
{
    auto started = std::chrono::steady_clock::now();
    std::ifstream in(text_file, std::ios::binary);
    if (!in) {
        throw StoreError("cannot read '" + text_file.string() + "'");
    }
    ImportReport report;
    std::error_code ec;
    report.bytes_text = fs::file_size(text_file, ec);

    StoreWriter writer(store_path, dims);
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    std::vector<std::string_view> fields;
    Vector values(static_cast<std::size_t>(dims));

    auto malformed = [&](std::string reason) {
        if (options.strict) {
            throw StoreError("line " + std::to_string(line_no) + ": " + reason);
        }
        report.malformed_lines.push_back({line_no, std::move(reason)});
    };

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = detail::trim(line);
        if (view.empty()) {
            continue;
        }
        fields.clear();
        std::size_t pos = 0;
        while (pos < view.size()) {
            while (pos < view.size() && (view[pos] == ' ' || view[pos] == '\t')) ++pos;
            auto start = pos;
            while (pos < view.size() && view[pos] != ' ' && view[pos] != '\t') ++pos;
            if (pos > start) fields.push_back(view.substr(start, pos - start));
        }

        if (first) {
            first = false;
            auto is_int = [](std::string_view s) {
                return !s.empty() && s.find_first_not_of("0123456789") == std::string_view::npos;
            };
            bool looks_like_header = fields.size() == 2 && is_int(fields[0]) && is_int(fields[1]);
            if (options.expect_header == HeaderMode::Yes && !looks_like_header) {
                throw StoreError("line 1: expected a 'count dims' header");
            }
            if (options.expect_header != HeaderMode::No && looks_like_header) {
                int header_dims = 0;
                std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), header_dims);
                if (header_dims != dims) {
                    throw StoreError("header declares " + std::string(fields[1]) + " dims, catalog expects " +
                                     std::to_string(dims));
                }
                report.header = true;
                continue;
            }
        }

        if (fields.size() != static_cast<std::size_t>(dims) + 1) {
            malformed("dimension mismatch: expected " + std::to_string(dims) + " values, found " +
                      std::to_string(fields.empty() ? 0 : fields.size() - 1));
            continue;
        }
        bool ok = true;
        for (int d = 0; d < dims; ++d) {
            auto field = fields[static_cast<std::size_t>(d) + 1];
            auto [end, err] = std::from_chars(field.data(), field.data() + field.size(), values[d]);
            if (err != std::errc{} || end != field.data() + field.size()) {
                malformed("bad float '" + std::string(field) + "' in column " + std::to_string(d + 2));
                ok = false;
                break;
            }
        }
        if (!ok) {
            continue;
        }
        if (writer.add(fields[0], values)) {
            ++report.imported;
        } else if (options.on_duplicate == DuplicatePolicy::KeepFirst) {
            ++report.skipped_duplicates;
        } else {
            throw StoreError("duplicate word '" + std::string(fields[0]) + "' at line " + std::to_string(line_no));
        }
    }
    if (in.bad()) {
        throw StoreError("read error in '" + text_file.string() + "'");
    }
    writer.commit();
    report.bytes_store = fs::file_size(store_path, ec);
    report.elapsed = std::chrono::steady_clock::now() - started;
    return report;
}

struct Store::Impl {
    fs::path path;
    DbHandle db;
    Statement lookup;
    int dims = 0;
    std::size_t count = 0;
    mutable std::mutex mutex;
};

Store::Store(const fs::path& path) : impl_(std::make_unique<Impl>())
{
    impl_->path = path;
    if (!fs::is_regular_file(path)) {
        throw StoreError("store file '" + path.string() + "' does not exist");
    }
    sqlite3* raw = nullptr;
    int rc = sqlite3_open_v2(sqlite_uri(path).c_str(), &raw,
                             SQLITE_OPEN_READONLY | SQLITE_OPEN_URI | SQLITE_OPEN_NOMUTEX, nullptr);
    impl_->db.reset(raw);
    if (rc != SQLITE_OK) {
        fail(raw, "cannot open store '" + path.string() + "'");
    }
    auto* db = impl_->db.get();
    auto meta = prepare(db, "SELECT key, value FROM meta");
    while (sqlite3_step(meta.get()) == SQLITE_ROW) {
        std::string key = reinterpret_cast<const char*>(sqlite3_column_text(meta.get(), 0));
        std::string value = reinterpret_cast<const char*>(sqlite3_column_text(meta.get(), 1));
        if (key == "dims") impl_->dims = std::stoi(value);
        if (key == "count") impl_->count = std::stoull(value);
    }
    if (impl_->dims <= 0) {
        throw StoreError("store '" + path.string() + "' has no valid dims metadata");
    }
    impl_->lookup = prepare(db, "SELECT vector FROM wec WHERE word = ?1");
}

Store::~Store() = default;
Store::Store(Store&&) noexcept = default;
Store& Store::operator=(Store&&) noexcept = default;

int Store::dims() const noexcept { return impl_->dims; }
std::size_t Store::vocab_size() const noexcept { return impl_->count; }
const fs::path& Store::path() const noexcept { return impl_->path; }

std::optional<Vector> Store::get_vector(std::string_view word) const
{
    std::lock_guard lock(impl_->mutex);
    auto* stmt = impl_->lookup.get();
    sqlite3_bind_text(stmt, 1, word.data(), static_cast<int>(word.size()), SQLITE_STATIC);
    std::optional<Vector> result;
    int rc = sqlite3_step(stmt);
    if (rc == SQLITE_ROW) {
        result = decode_vector(sqlite3_column_blob(stmt, 0), static_cast<std::size_t>(sqlite3_column_bytes(stmt, 0)));
    } else if (rc != SQLITE_DONE) {
        sqlite3_reset(stmt);
        fail(impl_->db.get(), "lookup of '" + std::string(word) + "'");
    }
    sqlite3_reset(stmt);
    return result;
}

BatchLookup Store::get_vectors_batch(std::span<const std::string> words) const
{
    BatchLookup out;
    std::unordered_set<std::string_view> seen;
    for (const auto& word : words) {
        if (!seen.insert(word).second) {
            continue;
        }
        if (auto v = get_vector(word)) {
            out.found.emplace_back(word, std::move(*v));
        } else {
            out.missing.push_back(word);
        }
    }
    return out;
}

bool Store::contains(std::string_view word) const
{
    std::lock_guard lock(impl_->mutex);
    auto* stmt = impl_->lookup.get();
    sqlite3_bind_text(stmt, 1, word.data(), static_cast<int>(word.size()), SQLITE_STATIC);
    int rc = sqlite3_step(stmt);
    sqlite3_reset(stmt);
    if (rc != SQLITE_ROW && rc != SQLITE_DONE) {
        fail(impl_->db.get(), "lookup of '" + std::string(word) + "'");
    }
    return rc == SQLITE_ROW;
}

void Store::iterate_vocab(const std::function<void(std::string_view)>& visit) const
{
    // A dedicated statement, stepped under the connection lock but released
    // while `visit` runs, so lookups from the visitor or other threads can
    // interleave.
    struct ScanGuard {
        std::mutex& mutex;
        Statement stmt;
        ~ScanGuard()
        {
            std::lock_guard lock(mutex);
            stmt.reset();
        }
    };
    std::unique_lock lock(impl_->mutex);
    ScanGuard scan{impl_->mutex, prepare(impl_->db.get(), "SELECT word FROM wec")};
    lock.unlock();
    std::string word;
    while (true) {
        lock.lock();
        int rc = sqlite3_step(scan.stmt.get());
        if (rc != SQLITE_ROW) {
            lock.unlock();
            if (rc != SQLITE_DONE) {
                throw StoreError("vocabulary scan of '" + impl_->path.string() + "' failed");
            }
            return;
        }
        word.assign(reinterpret_cast<const char*>(sqlite3_column_text(scan.stmt.get(), 0)),
                    static_cast<std::size_t>(sqlite3_column_bytes(scan.stmt.get(), 0)));
        lock.unlock();
        visit(word);
    }
}

} // namespace wombat
