#include "wombat/retrieve.hpp"

#include <unordered_map>

#include "wombat/error.hpp"

namespace wombat {

namespace fs = std::filesystem;
using nlohmann::json;

struct Connector::OpenWec {
    CatalogEntry entry;
    Store store;
    std::optional<PhraseModel> model;
};

Connector::Connector(fs::path root, bool create_if_missing) : catalog_(std::move(root), create_if_missing) {}

Connector::~Connector() = default;

ImportReport Connector::import_from_file(const fs::path& file, std::string_view identifier,
                                         const ImportOptions& options,
                                         const std::optional<PipelineDescriptor>& pipeline,
                                         const PhraseModel* phrase_model)
{
    auto id = parse_identifier(identifier);
    if (!fs::is_regular_file(file)) {
        throw StoreError("cannot read '" + file.string() + "'");
    }
    auto entry = catalog_.register_wec(id, pipeline.value_or(PipelineDescriptor::for_identifier(id)), phrase_model,
                                       file.string());
    try {
        auto report = import_text_file(file, catalog_.store_path(entry), entry.dims, options);
        catalog_.set_vocab_size(id, report.imported);
        return report;
    } catch (...) {
        catalog_.remove(id, true);
        throw;
    }
}

const Connector::OpenWec& Connector::open(const WecIdentifier& id) const
{
    auto key = id.normalized();
    auto entry = catalog_.lookup(id);
    if (!entry) {
        const_cast<Catalog&>(catalog_).reload();
        entry = catalog_.lookup(id);
        if (!entry) {
            throw CatalogError("WEC '" + key + "' is not in the catalog");
        }
    }
    std::lock_guard lock(open_mutex_);
    auto it = open_.find(key);
    if (it != open_.end() && it->second->entry == *entry) {
        return *it->second;
    }
    auto path = catalog_.store_path(*entry);
    if (!fs::exists(path)) {
        throw StoreError("WEC '" + key + "' has not been imported");
    }
    Store store(path);
    if (store.dims() != entry->dims) {
        throw StoreError("store of '" + key + "' has " + std::to_string(store.dims()) + " dims, catalog says " +
                         std::to_string(entry->dims));
    }
    std::optional<PhraseModel> model;
    if (entry->pipeline.phrases().mode == PhraseConfig::Mode::Model) {
        model = catalog_.load_phrase_model(*entry);
    }
    auto opened = std::make_unique<OpenWec>(OpenWec{*entry, std::move(store), std::move(model)});
    auto& slot = open_[key];
    if (slot) {
        // Callers may still hold references into the previous handle.
        retired_.push_back(std::move(slot));
    }
    slot = std::move(opened);
    return *slot;
}

const Store& Connector::store(const WecIdentifier& id) const { return open(id).store; }

namespace {

Tokens join_phrases(const CatalogEntry& entry, const Store& store, const std::optional<PhraseModel>& model,
                    Tokens tokens)
{
    const auto& config = entry.pipeline.phrases();
    switch (config.mode) {
    case PhraseConfig::Mode::Model:
        return apply_phrases_model(*model, tokens);
    case PhraseConfig::Mode::Vocab:
        return apply_phrases_vocab([&](std::string_view w) { return store.contains(w); }, tokens, config.max_len);
    case PhraseConfig::Mode::Off:
        break;
    }
    return tokens;
}

} // namespace

Tokens Connector::preprocess(const WecIdentifier& id, std::string_view raw, PreprocessCache* cache, bool phrases) const
{
    const auto& wec = open(id);
    auto tokens = run_pipeline(wec.entry.pipeline, raw, cache);
    if (!phrases) {
        return tokens;
    }
    return join_phrases(wec.entry, wec.store, wec.model, std::move(tokens));
}

Tokens Connector::apply_phrases_vocab(const WecIdentifier& id, const Tokens& tokens, int max_len) const
{
    const auto& store = open(id).store;
    return wombat::apply_phrases_vocab([&](std::string_view w) { return store.contains(w); }, tokens, max_len);
}

RetrievalResult Connector::get_vectors(std::string_view query, PreprocessCache& cache,
                                       const std::vector<InputUnit>& inputs, const RetrievalOptions& options) const
{
    auto parsed = parse_query(query);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        bool is_raw = std::holds_alternative<std::string>(inputs[i]);
        if (is_raw != options.raw) {
            throw Error("input unit " + std::to_string(i) + (options.raw ? " must be a raw string" : " must be a token list"));
        }
    }

    RetrievalResult result;
    result.per_wec.reserve(parsed.expanded.size());
    for (const auto& id : parsed.expanded) {
        const auto& wec = open(id);
        WecResult wec_result{id.normalized(), {}};
        wec_result.units.reserve(inputs.size());
        for (const auto& input : inputs) {
            UnitResult unit;
            if (options.raw) {
                unit.raw = std::get<std::string>(input);
                try {
                    unit.tokens = run_pipeline(wec.entry.pipeline, unit.raw, &cache);
                } catch (const PipelineError& e) {
                    throw PipelineError("WEC '" + wec_result.identifier + "': " + e.what());
                }
                if (options.phrases) {
                    unit.tokens = join_phrases(wec.entry, wec.store, wec.model, std::move(unit.tokens));
                }
            } else {
                unit.tokens = std::get<Tokens>(input);
            }

            auto batch = wec.store.get_vectors_batch(unit.tokens);
            unit.missing = std::move(batch.missing);
            if (options.in_order) {
                std::unordered_map<std::string_view, const Vector*> found;
                for (const auto& [word, vector] : batch.found) {
                    found.emplace(word, &vector);
                }
                for (const auto& token : unit.tokens) {
                    if (auto it = found.find(token); it != found.end()) {
                        unit.words.push_back(token);
                        unit.vectors.push_back(*it->second);
                    }
                }
            } else {
                for (auto& [word, vector] : batch.found) {
                    unit.words.push_back(std::move(word));
                    unit.vectors.push_back(std::move(vector));
                }
            }
            if (!options.as_tuple) {
                unit.words.clear();
            }
            wec_result.units.push_back(std::move(unit));
        }
        result.per_wec.push_back(std::move(wec_result));
    }
    return result;
}

json to_json(const RetrievalResult& result)
{
    json results = json::array();
    for (const auto& wec : result.per_wec) {
        json units = json::array();
        for (const auto& unit : wec.units) {
            json u = {{"raw", unit.raw}, {"tokens", unit.tokens}, {"missing", unit.missing}};
            if (!unit.words.empty() || unit.vectors.empty()) {
                json pairs = json::array();
                for (std::size_t i = 0; i < unit.words.size(); ++i) {
                    pairs.push_back(json::array({unit.words[i], unit.vectors[i]}));
                }
                u["pairs"] = std::move(pairs);
            } else {
                u["vectors"] = unit.vectors;
            }
            units.push_back(std::move(u));
        }
        results.push_back({{"identifier", wec.identifier}, {"units", std::move(units)}});
    }
    return {{"results", std::move(results)}};
}

RetrievalResult retrieval_from_json(const json& doc)
{
    RetrievalResult result;
    for (const auto& w : doc.at("results")) {
        WecResult wec{w.at("identifier").get<std::string>(), {}};
        for (const auto& u : w.at("units")) {
            UnitResult unit;
            unit.raw = u.at("raw").get<std::string>();
            unit.tokens = u.at("tokens").get<Tokens>();
            unit.missing = u.at("missing").get<std::vector<std::string>>();
            if (u.contains("pairs")) {
                for (const auto& p : u.at("pairs")) {
                    unit.words.push_back(p.at(0).get<std::string>());
                    unit.vectors.push_back(p.at(1).get<Vector>());
                }
            } else {
                unit.vectors = u.at("vectors").get<std::vector<Vector>>();
            }
            wec.units.push_back(std::move(unit));
        }
        result.per_wec.push_back(std::move(wec));
    }
    return result;
}

} // namespace wombat
