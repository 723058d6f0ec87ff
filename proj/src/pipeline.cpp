#include "wombat/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <mutex>

#include "json.hpp"

#include "subprocess.hpp"
#include "text_util.hpp"
#include "wombat/error.hpp"
#include "wombat/hash.hpp"
#include "wombat/porter_stemmer.hpp"

namespace wombat {

using nlohmann::json;

namespace {

bool is_ascii_punct(unsigned char c)
{
    return (c >= 0x21 && c <= 0x2f) || (c >= 0x3a && c <= 0x40) || (c >= 0x5b && c <= 0x60) ||
           (c >= 0x7b && c <= 0x7e);
}

// Length in bytes of a whitespace code point starting at s[i], or 0.
std::size_t whitespace_length(std::string_view s, std::size_t i)
{
    auto at = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char c = at(i);
    if (detail::is_ascii_space(static_cast<char>(c))) {
        return 1;
    }
    std::size_t left = s.size() - i;
    if (c == 0xC2 && left >= 2 && (at(i + 1) == 0x85 || at(i + 1) == 0xA0)) {
        return 2;
    }
    if (left < 3) {
        return 0;
    }
    unsigned char c1 = at(i + 1);
    unsigned char c2 = at(i + 2);
    if (c == 0xE1 && c1 == 0x9A && c2 == 0x80) return 3;                               // U+1680
    if (c == 0xE2 && c1 == 0x80 && ((c2 >= 0x80 && c2 <= 0x8A) || c2 == 0xA8 || c2 == 0xA9 || c2 == 0xAF))
        return 3;                                                                      // U+2000..200A, 2028, 2029, 202F
    if (c == 0xE2 && c1 == 0x81 && c2 == 0x9F) return 3;                               // U+205F
    if (c == 0xE3 && c1 == 0x80 && c2 == 0x80) return 3;                               // U+3000
    return 0;
}

std::vector<std::string_view> split_unicode_whitespace(std::string_view text)
{
    std::vector<std::string_view> chunks;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        auto ws = whitespace_length(text, i);
        if (ws == 0) {
            ++i;
            continue;
        }
        if (i > start) {
            chunks.push_back(text.substr(start, i - start));
        }
        i += ws;
        start = i;
    }
    if (start < text.size()) {
        chunks.push_back(text.substr(start));
    }
    return chunks;
}

void peel_punctuation(std::string_view chunk, Tokens& out)
{
    std::size_t begin = 0;
    while (begin < chunk.size() && is_ascii_punct(static_cast<unsigned char>(chunk[begin]))) {
        out.emplace_back(1, chunk[begin]);
        ++begin;
    }
    std::size_t end = chunk.size();
    while (end > begin && is_ascii_punct(static_cast<unsigned char>(chunk[end - 1]))) {
        --end;
    }
    if (end > begin) {
        out.emplace_back(chunk.substr(begin, end - begin));
    }
    for (std::size_t k = end; k < chunk.size(); ++k) {
        out.emplace_back(1, chunk[k]);
    }
}

char32_t fold_code_point(char32_t cp)
{
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
    return cp;
}

std::string external_content_hash(const std::string& command)
{
    std::string material = command;
    std::error_code ec;
    for (auto part : detail::split(command, ' ')) {
        auto arg = detail::trim(part);
        if (arg.empty()) continue;
        std::filesystem::path path{std::string(arg)};
        if (std::filesystem::is_regular_file(path, ec)) {
            material += '\0';
            material += arg;
            material += '\0';
            material += sha256_file(path);
        }
    }
    return sha256_hex(material);
}

Tokens split_whitespace(std::string_view line)
{
    Tokens out;
    for (auto chunk : split_unicode_whitespace(line)) {
        out.emplace_back(chunk);
    }
    return out;
}

Tokens run_external(const ExternalStage& stage, const Tokens& tokens)
{
    if (external_content_hash(stage.command) != stage.content_hash) {
        throw PipelineError("external stage '" + stage.command + "': content changed since the pipeline was recorded");
    }
    auto output = detail::run_filter_process(stage.command, detail::join(tokens, " ") + "\n");
    while (!output.empty() && (output.back() == '\n' || output.back() == '\r')) {
        output.pop_back();
    }
    if (output.find('\n') != std::string::npos) {
        throw PipelineError("external stage '" + stage.command + "': malformed output (expected exactly one line)");
    }
    return split_whitespace(output);
}

struct StageToJson {
    json operator()(const TokenizeStage& s) const { return {{"stage", "tokenize"}, {"rules", s.rules}}; }
    json operator()(const CaseFoldStage& s) const { return {{"stage", "case_fold"}, {"on", s.on}}; }
    json operator()(const StemStage& s) const { return {{"stage", "stem"}, {"on", s.on}}; }
    json operator()(const StopwordStage& s) const
    {
        if (!s.list) {
            return {{"stage", "stopword_filter"}, {"list", "off"}};
        }
        return {{"stage", "stopword_filter"}, {"list", s.list->id()}, {"words", s.list->words()}};
    }
    json operator()(const StripSpecialStage& s) const { return {{"stage", "strip_special"}, {"rules", s.rules}}; }
    json operator()(const ExternalStage& s) const
    {
        return {{"stage", "external"}, {"command", s.command}, {"content_hash", s.content_hash}};
    }
};

json phrases_to_json(const PhraseConfig& p)
{
    switch (p.mode) {
    case PhraseConfig::Mode::Model:
        return {{"mode", "model"}, {"model_hash", p.model_hash}};
    case PhraseConfig::Mode::Vocab:
        return {{"mode", "vocab"}, {"max_len", p.max_len}};
    case PhraseConfig::Mode::Off:
        break;
    }
    return {{"mode", "off"}};
}

Stage stage_from_json(const json& j)
{
    auto name = j.at("stage").get<std::string>();
    if (name == "tokenize") {
        auto rules = j.at("rules").get<std::string>();
        if (rules != "default" && rules != "whitespace") {
            throw PipelineError("unknown tokenizer rule set '" + rules + "'");
        }
        return TokenizeStage{rules};
    }
    if (name == "case_fold") return CaseFoldStage{j.at("on").get<bool>()};
    if (name == "stem") return StemStage{j.at("on").get<bool>()};
    if (name == "stopword_filter") {
        auto list = j.at("list").get<std::string>();
        if (list == "off") return StopwordStage{};
        return StopwordStage{StopwordList(list, j.at("words").get<std::vector<std::string>>())};
    }
    if (name == "strip_special") {
        auto rules = j.at("rules").get<std::string>();
        if (rules != "default" && rules != "off") {
            throw PipelineError("unknown strip_special rule set '" + rules + "'");
        }
        return StripSpecialStage{rules};
    }
    if (name == "external") {
        return ExternalStage{j.at("command").get<std::string>(), j.at("content_hash").get<std::string>()};
    }
    throw PipelineError("unknown pipeline stage '" + name + "'");
}

PhraseConfig phrases_from_json(const json& j)
{
    PhraseConfig p;
    auto mode = j.at("mode").get<std::string>();
    if (mode == "off") {
        p.mode = PhraseConfig::Mode::Off;
    } else if (mode == "model") {
        p.mode = PhraseConfig::Mode::Model;
        p.model_hash = j.at("model_hash").get<std::string>();
    } else if (mode == "vocab") {
        p.mode = PhraseConfig::Mode::Vocab;
        p.max_len = j.at("max_len").get<int>();
    } else {
        throw PipelineError("unknown phrase mode '" + mode + "'");
    }
    return p;
}

} // namespace

std::string_view stage_name(const Stage& stage)
{
    static constexpr std::string_view kNames[] = {"tokenize",        "case_fold",     "stem",
                                                  "stopword_filter", "strip_special", "external"};
    return kNames[stage.index()];
}

ExternalStage ExternalStage::make(std::string command)
{
    ExternalStage stage;
    stage.content_hash = external_content_hash(command);
    stage.command = std::move(command);
    return stage;
}

PipelineDescriptor::PipelineDescriptor() { seal(); }

PipelineDescriptor::PipelineDescriptor(std::vector<Stage> stages, PhraseConfig phrases)
    : stages_(std::move(stages)), phrases_(std::move(phrases))
{
    if (phrases_.mode == PhraseConfig::Mode::Vocab && phrases_.max_len < 2) {
        throw PipelineError("vocabulary phrase joining needs max_len >= 2");
    }
    if (phrases_.mode == PhraseConfig::Mode::Model && phrases_.model_hash.empty()) {
        throw PipelineError("model phrase joining needs a model hash");
    }
    seal();
}

PipelineDescriptor PipelineDescriptor::for_identifier(const WecIdentifier& id)
{
    return PipelineDescriptor({TokenizeStage{"default"}, CaseFoldStage{id.folded()}, StemStage{id.unit() == "stem"}});
}

PipelineDescriptor PipelineDescriptor::deserialize(std::string_view text)
{
    try {
        auto j = json::parse(text);
        if (j.at("version").get<int>() != 1) {
            throw PipelineError("unsupported pipeline version");
        }
        std::vector<Stage> stages;
        for (const auto& s : j.at("stages")) {
            stages.push_back(stage_from_json(s));
        }
        return PipelineDescriptor(std::move(stages), phrases_from_json(j.at("phrases")));
    } catch (const json::exception& e) {
        throw PipelineError(std::string("malformed pipeline descriptor: ") + e.what());
    }
}

bool PipelineDescriptor::case_fold() const
{
    return std::any_of(stages_.begin(), stages_.end(), [](const Stage& s) {
        auto* fold = std::get_if<CaseFoldStage>(&s);
        return fold && fold->on;
    });
}

bool PipelineDescriptor::stem() const
{
    return std::any_of(stages_.begin(), stages_.end(), [](const Stage& s) {
        auto* stem = std::get_if<StemStage>(&s);
        return stem && stem->on;
    });
}

void PipelineDescriptor::validate_for(const WecIdentifier& id) const
{
    if (case_fold() != id.folded()) {
        throw PipelineError("pipeline case_fold is " + std::string(case_fold() ? "on" : "off") +
                            " but identifier has fold:" + std::string(*id.find("fold")));
    }
    if (stem() != (id.unit() == "stem")) {
        throw PipelineError("pipeline stem is " + std::string(stem() ? "on" : "off") +
                            " but identifier has unit:" + id.unit());
    }
}

PipelineDescriptor PipelineDescriptor::with_phrases(PhraseConfig phrases) const
{
    return PipelineDescriptor(stages_, std::move(phrases));
}

void PipelineDescriptor::seal()
{
    json stages = json::array();
    for (const auto& s : stages_) {
        stages.push_back(std::visit(StageToJson{}, s));
    }
    json level1 = {{"stages", stages}, {"version", 1}};
    stages_hash_ = sha256_hex(level1.dump());
    json full = {{"phrases", phrases_to_json(phrases_)}, {"stages", stages}, {"version", 1}};
    serialized_ = full.dump();
    hash_ = sha256_hex(serialized_);
}

Tokens PreprocessCache::get_or_compute(const std::string& pipeline_hash, std::string_view raw,
                                       const std::function<Tokens()>& compute)
{
    std::string key;
    key.reserve(pipeline_hash.size() + 1 + raw.size());
    key += pipeline_hash;
    key += '\0';
    key += raw;
    {
        std::shared_lock lock(mutex_);
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            ++hits_;
            return it->second;
        }
    }
    ++misses_;
    auto tokens = compute();
    std::unique_lock lock(mutex_);
    entries_.emplace(std::move(key), tokens);
    return tokens;
}

std::size_t PreprocessCache::size() const
{
    std::shared_lock lock(mutex_);
    return entries_.size();
}

void PreprocessCache::clear()
{
    std::unique_lock lock(mutex_);
    entries_.clear();
    hits_ = 0;
    misses_ = 0;
}

Tokens tokenize(std::string_view text, std::string_view rules)
{
    Tokens out;
    if (rules == "whitespace") {
        return split_whitespace(text);
    }
    if (rules != "default") {
        throw PipelineError("unknown tokenizer rule set '" + std::string(rules) + "'");
    }
    for (auto chunk : split_unicode_whitespace(text)) {
        peel_punctuation(chunk, out);
    }
    return out;
}

std::string case_fold(std::string_view token)
{
    std::string out;
    out.reserve(token.size());
    for (std::size_t i = 0; i < token.size(); ++i) {
        auto c = static_cast<unsigned char>(token[i]);
        if (c < 0x80) {
            out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : static_cast<char>(c);
            continue;
        }
        if ((c & 0xE0) == 0xC0 && i + 1 < token.size() && (static_cast<unsigned char>(token[i + 1]) & 0xC0) == 0x80) {
            char32_t cp = ((c & 0x1F) << 6) | (static_cast<unsigned char>(token[i + 1]) & 0x3F);
            cp = fold_code_point(cp);
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
            ++i;
            continue;
        }
        out += static_cast<char>(c);
    }
    return out;
}

bool is_punctuation_token(std::string_view token)
{
    return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) {
        return is_ascii_punct(static_cast<unsigned char>(c));
    });
}

namespace {

struct StageRunner {
    Tokens& tokens;

    void operator()(const TokenizeStage& s) const
    {
        Tokens out;
        for (const auto& t : tokens) {
            auto parts = tokenize(t, s.rules);
            std::move(parts.begin(), parts.end(), std::back_inserter(out));
        }
        tokens = std::move(out);
    }
    void operator()(const CaseFoldStage& s) const
    {
        if (!s.on) return;
        for (auto& t : tokens) t = case_fold(t);
    }
    void operator()(const StemStage& s) const
    {
        if (!s.on) return;
        for (auto& t : tokens) t = porter_stem(t);
    }
    void operator()(const StopwordStage& s) const
    {
        if (!s.list) return;
        std::erase_if(tokens, [&](const std::string& t) { return s.list->contains(t); });
    }
    void operator()(const StripSpecialStage& s) const
    {
        if (s.rules == "off") return;
        std::erase_if(tokens, [](const std::string& t) { return is_punctuation_token(t); });
    }
    void operator()(const ExternalStage& s) const { tokens = run_external(s, tokens); }
};

Tokens run_stages(const PipelineDescriptor& pipeline, std::string_view raw)
{
    Tokens tokens;
    if (!detail::trim(raw).empty()) {
        tokens.emplace_back(raw);
    }
    for (const auto& stage : pipeline.stages()) {
        std::visit(StageRunner{tokens}, stage);
    }
    return tokens;
}

} // namespace

Tokens run_pipeline(const PipelineDescriptor& pipeline, std::string_view raw, PreprocessCache* cache)
{
    if (cache == nullptr) {
        return run_stages(pipeline, raw);
    }
    return cache->get_or_compute(pipeline.stages_hash(), raw, [&] { return run_stages(pipeline, raw); });
}

} // namespace wombat
