#include "wombat/catalog.hpp"

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "text_util.hpp"
#include "wombat/error.hpp"
#include "wombat/store.hpp"

namespace wombat {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kHeader = "# wombat catalog manifest v1";
constexpr std::string_view kLockName = ".catalog.lock";
constexpr std::string_view kInfoName = "wec.info";
constexpr std::string_view kPhraseModelName = "phrases.model";

class FileLock {
public:
    explicit FileLock(const fs::path& path)
    {
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (fd_ < 0) {
            throw CatalogError("cannot open lock file '" + path.string() + "': " + std::strerror(errno));
        }
        while (::flock(fd_, LOCK_EX) != 0) {
            if (errno != EINTR) {
                ::close(fd_);
                throw CatalogError("cannot lock '" + path.string() + "': " + std::strerror(errno));
            }
        }
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;
    ~FileLock()
    {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }

private:
    int fd_ = -1;
};

std::string escape(std::string_view value)
{
    std::string out;
    for (char c : value) {
        if (c == '\\') {
            out += "\\\\";
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    return out;
}

std::string unescape(std::string_view value)
{
    std::string out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (value[i] == '\\' && i + 1 < value.size()) {
            ++i;
            out += value[i] == 'n' ? '\n' : value[i];
        } else {
            out += value[i];
        }
    }
    return out;
}

std::string utc_timestamp()
{
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

std::string format_record(const CatalogEntry& e)
{
    std::ostringstream out;
    out << "[wec]\n";
    out << "identifier=" << escape(e.identifier.normalized()) << '\n';
    out << "dims=" << e.dims << '\n';
    out << "vocab_size=" << e.vocab_size << '\n';
    out << "pipeline_hash=" << e.pipeline.hash() << '\n';
    out << "pipeline=" << escape(e.pipeline.serialized()) << '\n';
    out << "phrase_model=" << (e.phrase_model_ref ? escape(*e.phrase_model_ref) : "-") << '\n';
    out << "created_at=" << escape(e.created_at) << '\n';
    out << "source_file=" << escape(e.source_file) << '\n';
    out << "directory=" << escape(e.directory) << '\n';
    return out.str();
}

CatalogEntry parse_record(const std::map<std::string, std::string>& fields, std::size_t line_no)
{
    auto get = [&](const char* key) -> const std::string& {
        auto it = fields.find(key);
        if (it == fields.end()) {
            throw CatalogError("manifest record ending at line " + std::to_string(line_no) + " lacks '" + key + "'");
        }
        return it->second;
    };
    try {
        auto id = parse_identifier(get("identifier"));
        auto pipeline = PipelineDescriptor::deserialize(get("pipeline"));
        if (pipeline.hash() != get("pipeline_hash")) {
            throw CatalogError("pipeline hash mismatch for '" + id.normalized() + "'");
        }
        std::optional<std::string> model;
        if (get("phrase_model") != "-") {
            model = get("phrase_model");
        }
        return CatalogEntry{id,
                            std::stoi(get("dims")),
                            static_cast<std::size_t>(std::stoull(get("vocab_size"))),
                            std::move(pipeline),
                            std::move(model),
                            get("created_at"),
                            get("source_file"),
                            get("directory")};
    } catch (const std::logic_error& e) {
        throw CatalogError("manifest record ending at line " + std::to_string(line_no) + ": " + e.what());
    }
}

void write_file_atomically(const fs::path& path, const std::string& content)
{
    auto temp = path;
    temp += ".tmp-" + std::to_string(::getpid());
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        out << content;
        out.flush();
        if (!out) {
            throw CatalogError("cannot write '" + temp.string() + "'");
        }
    }
    fs::rename(temp, path);
}

} // namespace

Catalog::Catalog(fs::path root, bool create_if_missing) : root_(std::move(root))
{
    if (!fs::is_directory(root_)) {
        if (!create_if_missing) {
            throw CatalogError("catalog root '" + root_.string() + "' does not exist");
        }
        fs::create_directories(root_);
    }
    auto manifest = root_ / kManifestName;
    if (!fs::exists(manifest)) {
        FileLock lock(root_ / kLockName);
        if (!fs::exists(manifest)) {
            write_manifest({});
        }
    }
    entries_ = read_manifest();
}

template <typename F>
auto Catalog::modify(F&& change)
{
    std::unique_lock lock(mutex_);
    FileLock file_lock(root_ / kLockName);
    auto entries = read_manifest();
    auto result = change(entries);
    write_manifest(entries);
    entries_ = std::move(entries);
    return result;
}

std::map<std::string, CatalogEntry> Catalog::read_manifest() const
{
    std::ifstream in(root_ / kManifestName, std::ios::binary);
    if (!in) {
        throw CatalogError("cannot read manifest in '" + root_.string() + "'");
    }
    std::map<std::string, CatalogEntry> entries;
    std::map<std::string, std::string> fields;
    bool in_record = false;
    std::size_t line_no = 0;
    auto flush = [&] {
        if (!in_record) return;
        auto entry = parse_record(fields, line_no);
        auto key = entry.identifier.normalized();
        if (!entries.emplace(key, std::move(entry)).second) {
            throw CatalogError("manifest lists '" + key + "' twice");
        }
        fields.clear();
    };
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (line == "[wec]") {
            flush();
            in_record = true;
            continue;
        }
        auto eq = line.find('=');
        if (!in_record || eq == std::string::npos) {
            throw CatalogError("manifest line " + std::to_string(line_no) + " is malformed");
        }
        fields[line.substr(0, eq)] = unescape(std::string_view(line).substr(eq + 1));
    }
    flush();
    return entries;
}

void Catalog::write_manifest(const std::map<std::string, CatalogEntry>& entries) const
{
    std::string text(kHeader);
    text += '\n';
    for (const auto& [key, entry] : entries) {
        text += '\n';
        text += format_record(entry);
    }
    write_file_atomically(root_ / kManifestName, text);
}

CatalogEntry Catalog::register_wec(const WecIdentifier& id, const PipelineDescriptor& pipeline,
                                   const PhraseModel* phrase_model, const std::string& source)
{
    pipeline.validate_for(id);
    auto bound = pipeline;
    if (phrase_model != nullptr) {
        bound = pipeline.with_phrases({PhraseConfig::Mode::Model, phrase_model->content_hash(), 4});
    } else if (pipeline.phrases().mode == PhraseConfig::Mode::Model) {
        throw PipelineError("pipeline expects a phrase model but none was supplied");
    }
    return modify([&](std::map<std::string, CatalogEntry>& entries) {
        auto key = id.normalized();
        if (auto it = entries.find(key); it != entries.end()) {
            throw CatalogError("WEC '" + key + "' is already registered (source '" + it->second.source_file +
                               "', created " + it->second.created_at + ")");
        }
        CatalogEntry entry{id, id.dims(), 0, bound, std::nullopt, utc_timestamp(), source, id.directory_name()};
        auto dir = wec_directory(entry);
        if (fs::exists(dir) && !fs::is_empty(dir)) {
            throw CatalogError("directory '" + dir.string() + "' exists but is not in the catalog");
        }
        fs::create_directories(dir);
        if (phrase_model != nullptr) {
            phrase_model->save(dir / kPhraseModelName);
            entry.phrase_model_ref = std::string(kPhraseModelName);
        }
        write_file_atomically(dir / kInfoName, format_record(entry));
        entries.emplace(key, entry);
        return entry;
    });
}

std::optional<CatalogEntry> Catalog::lookup(const WecIdentifier& id) const
{
    std::shared_lock lock(mutex_);
    auto it = entries_.find(id.normalized());
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<CatalogEntry> Catalog::list_entries(const AttributeMap& filter) const
{
    std::shared_lock lock(mutex_);
    std::vector<CatalogEntry> out;
    for (const auto& [key, entry] : entries_) {
        if (entry.identifier.matches(filter)) {
            out.push_back(entry);
        }
    }
    return out;
}

void Catalog::set_vocab_size(const WecIdentifier& id, std::size_t vocab_size)
{
    modify([&](std::map<std::string, CatalogEntry>& entries) {
        auto it = entries.find(id.normalized());
        if (it == entries.end()) {
            throw CatalogError("WEC '" + id.normalized() + "' is not in the catalog");
        }
        it->second.vocab_size = vocab_size;
        write_file_atomically(wec_directory(it->second) / kInfoName, format_record(it->second));
        return 0;
    });
}

CatalogEntry Catalog::attach_phrase_model(const WecIdentifier& id, const PhraseModel& model)
{
    return modify([&](std::map<std::string, CatalogEntry>& entries) {
        auto it = entries.find(id.normalized());
        if (it == entries.end()) {
            throw CatalogError("WEC '" + id.normalized() + "' is not in the catalog");
        }
        auto& entry = it->second;
        auto dir = wec_directory(entry);
        model.save(dir / kPhraseModelName);
        entry.phrase_model_ref = std::string(kPhraseModelName);
        entry.pipeline = entry.pipeline.with_phrases({PhraseConfig::Mode::Model, model.content_hash(), 4});
        write_file_atomically(dir / kInfoName, format_record(entry));
        return entry;
    });
}

void Catalog::remove(const WecIdentifier& id, bool force)
{
    auto key = id.normalized();
    if (!force) {
        throw CatalogError("refusing to remove '" + key + "' without force");
    }
    modify([&](std::map<std::string, CatalogEntry>& entries) {
        auto it = entries.find(key);
        if (it == entries.end()) {
            throw CatalogError("WEC '" + key + "' is not in the catalog");
        }
        fs::remove_all(wec_directory(it->second));
        entries.erase(it);
        return 0;
    });
}

fs::path Catalog::store_path(const CatalogEntry& entry) const { return wec_directory(entry) / Store::kFileName; }

PhraseModel Catalog::load_phrase_model(const CatalogEntry& entry) const
{
    if (!entry.phrase_model_ref) {
        throw CatalogError("WEC '" + entry.identifier.normalized() + "' has no phrase model");
    }
    auto model = PhraseModel::load(wec_directory(entry) / *entry.phrase_model_ref);
    if (model.content_hash() != entry.pipeline.phrases().model_hash) {
        throw CatalogError("phrase model of '" + entry.identifier.normalized() + "' does not match its pipeline hash");
    }
    return model;
}

void Catalog::reload()
{
    auto fresh = read_manifest();
    std::unique_lock lock(mutex_);
    entries_ = std::move(fresh);
}

std::string Catalog::manifest_text() const
{
    std::shared_lock lock(mutex_);
    std::string text(kHeader);
    text += '\n';
    for (const auto& [key, entry] : entries_) {
        text += '\n';
        text += format_record(entry);
    }
    return text;
}

} // namespace wombat
