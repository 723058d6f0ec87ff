#include "wombat/phrases.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "text_util.hpp"
#include "wombat/error.hpp"
#include "wombat/hash.hpp"

namespace wombat {

namespace {

std::string format_double(double value)
{
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, end);
}

double parse_double(std::string_view text)
{
    double value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) {
        throw Error("phrase model: bad number '" + std::string(text) + "'");
    }
    return value;
}

std::uint64_t parse_count(std::string_view text)
{
    std::uint64_t value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) {
        throw Error("phrase model: bad count '" + std::string(text) + "'");
    }
    return value;
}

// Tokens are written with '%', space, tab, CR and LF percent-encoded so a
// record always splits into the expected number of fields.
std::string escape_token(const std::string& token)
{
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (char c : token) {
        if (c == '%' || c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            auto b = static_cast<unsigned char>(c);
            out += '%';
            out += kHex[b >> 4];
            out += kHex[b & 0xF];
        } else {
            out += c;
        }
    }
    return out;
}

std::string unescape_token(std::string_view text)
{
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '%') {
            out += text[i];
            continue;
        }
        unsigned value = 0;
        if (i + 2 >= text.size()) {
            throw Error("phrase model: truncated escape in '" + std::string(text) + "'");
        }
        auto [end, err] = std::from_chars(text.data() + i + 1, text.data() + i + 3, value, 16);
        if (err != std::errc{} || end != text.data() + i + 3) {
            throw Error("phrase model: bad escape in '" + std::string(text) + "'");
        }
        out += static_cast<char>(value);
        i += 2;
    }
    return out;
}

void count_sentence(PhraseLayer& layer, const Tokens& sentence)
{
    for (std::size_t i = 0; i < sentence.size(); ++i) {
        ++layer.unigram_counts[sentence[i]];
        if (i + 1 < sentence.size()) {
            ++layer.bigram_counts[{sentence[i], sentence[i + 1]}];
        }
    }
    layer.token_count += sentence.size();
}

Tokens apply_layer(const PhraseModel& model, std::size_t layer, const Tokens& tokens)
{
    Tokens out;
    out.reserve(tokens.size());
    std::size_t i = 0;
    while (i < tokens.size()) {
        if (i + 1 < tokens.size()) {
            auto s = model.score(layer, tokens[i], tokens[i + 1]);
            if (s && *s >= model.threshold()) {
                out.push_back(tokens[i] + std::string(PhraseModel::delimiter()) + tokens[i + 1]);
                i += 2;
                continue;
            }
        }
        out.push_back(tokens[i]);
        ++i;
    }
    return out;
}

} // namespace

std::uint64_t PhraseLayer::unigram(const std::string& word) const
{
    auto it = unigram_counts.find(word);
    return it == unigram_counts.end() ? 0 : it->second;
}

std::uint64_t PhraseLayer::bigram(const std::string& a, const std::string& b) const
{
    auto it = bigram_counts.find({a, b});
    return it == bigram_counts.end() ? 0 : it->second;
}

PhraseModel::PhraseModel(std::vector<PhraseLayer> layers, PhraseParams params)
    : layers_(std::move(layers)), params_(params)
{
    if (params_.delta < 0 || params_.threshold < 0) {
        throw Error("phrase model: delta and threshold must be non-negative");
    }
    for (const auto& layer : layers_) {
        for (const auto& [pair, count] : layer.bigram_counts) {
            if (layer.unigram(pair.first) == 0 || layer.unigram(pair.second) == 0) {
                throw Error("phrase model: bigram (" + pair.first + ", " + pair.second + ") has an unseen part");
            }
        }
    }
    params_.passes = static_cast<int>(layers_.size());
}

std::optional<double> PhraseModel::score(std::size_t layer, const std::string& a, const std::string& b) const
{
    const auto& l = layers_.at(layer);
    auto ab = l.bigram(a, b);
    if (ab == 0) {
        return std::nullopt;
    }
    auto ca = static_cast<double>(l.unigram(a));
    auto cb = static_cast<double>(l.unigram(b));
    return (static_cast<double>(ab) - params_.delta) * static_cast<double>(l.token_count) / (ca * cb);
}

std::string PhraseModel::serialize() const
{
    std::ostringstream out;
    out << "wombat-phrases 1\n";
    out << "delta " << format_double(params_.delta) << '\n';
    out << "threshold " << format_double(params_.threshold) << '\n';
    out << "delimiter " << delimiter() << '\n';
    out << "passes " << layers_.size() << '\n';
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const auto& layer = layers_[k];
        out << "layer " << (k + 1) << ' ' << layer.token_count << '\n';
        std::map<std::string, std::uint64_t> unigrams(layer.unigram_counts.begin(), layer.unigram_counts.end());
        for (const auto& [word, count] : unigrams) {
            out << "u " << escape_token(word) << ' ' << count << '\n';
        }
        std::map<std::pair<std::string, std::string>, std::uint64_t> bigrams(layer.bigram_counts.begin(),
                                                                            layer.bigram_counts.end());
        for (const auto& [pair, count] : bigrams) {
            out << "b " << escape_token(pair.first) << ' ' << escape_token(pair.second) << ' ' << count << '\n';
        }
    }
    return out.str();
}

PhraseModel PhraseModel::deserialize(std::string_view text)
{
    PhraseParams params;
    std::vector<PhraseLayer> layers;
    std::size_t declared_passes = 0;
    std::size_t line_no = 0;
    bool header = false;
    for (auto raw : detail::split(text, '\n')) {
        ++line_no;
        auto line = detail::trim(raw);
        if (line.empty()) continue;
        auto fields = detail::split(line, ' ');
        auto fail = [&](const std::string& why) {
            throw Error("phrase model line " + std::to_string(line_no) + ": " + why);
        };
        if (!header) {
            if (line != "wombat-phrases 1") fail("missing 'wombat-phrases 1' header");
            header = true;
            continue;
        }
        const auto kind = fields[0];
        if (kind == "delta" && fields.size() == 2) {
            params.delta = parse_double(fields[1]);
        } else if (kind == "threshold" && fields.size() == 2) {
            params.threshold = parse_double(fields[1]);
        } else if (kind == "delimiter" && fields.size() == 2) {
            if (fields[1] != delimiter()) fail("unsupported delimiter");
        } else if (kind == "passes" && fields.size() == 2) {
            declared_passes = parse_count(fields[1]);
        } else if (kind == "layer" && fields.size() == 3) {
            layers.emplace_back();
            layers.back().token_count = parse_count(fields[2]);
        } else if (kind == "u" && fields.size() == 3 && !layers.empty()) {
            layers.back().unigram_counts[unescape_token(fields[1])] = parse_count(fields[2]);
        } else if (kind == "b" && fields.size() == 4 && !layers.empty()) {
            layers.back().bigram_counts[{unescape_token(fields[1]), unescape_token(fields[2])}] = parse_count(fields[3]);
        } else {
            fail("unrecognized record");
        }
    }
    if (!header) {
        throw Error("phrase model: empty input");
    }
    if (declared_passes != layers.size()) {
        throw Error("phrase model: declared " + std::to_string(declared_passes) + " passes but found " +
                    std::to_string(layers.size()) + " layers");
    }
    return PhraseModel(std::move(layers), params);
}

void PhraseModel::save(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << serialize();
    if (!out) {
        throw Error("cannot write phrase model '" + path.string() + "'");
    }
}

PhraseModel PhraseModel::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read phrase model '" + path.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return deserialize(buffer.str());
}

std::string PhraseModel::content_hash() const { return sha256_hex(serialize()); }

PhraseModel train_phrase_model(const CorpusSource& corpus, PhraseParams params)
{
    if (params.passes < 1) {
        throw Error("phrase training needs at least one pass");
    }
    std::vector<PhraseLayer> layers;
    PhraseModel partial({}, params);
    for (int pass = 0; pass < params.passes; ++pass) {
        PhraseLayer layer;
        std::size_t sentences = 0;
        corpus([&](const Tokens& sentence) {
            ++sentences;
            count_sentence(layer, pass == 0 ? sentence : apply_phrases_model(partial, sentence));
        });
        if (sentences == 0 || layer.token_count == 0) {
            throw Error("phrase training: empty corpus");
        }
        layers.push_back(std::move(layer));
        partial = PhraseModel(layers, params);
    }
    return partial;
}

PhraseModel train_phrase_model(std::span<const Tokens> corpus, PhraseParams params)
{
    return train_phrase_model(
        [corpus](const std::function<void(const Tokens&)>& visit) {
            for (const auto& sentence : corpus) visit(sentence);
        },
        params);
}

Tokens apply_phrases_model(const PhraseModel& model, const Tokens& tokens)
{
    Tokens current = tokens;
    for (std::size_t layer = 0; layer < model.layers().size(); ++layer) {
        current = apply_layer(model, layer, current);
    }
    return current;
}

Tokens apply_phrases_vocab(const std::function<bool(std::string_view)>& in_vocabulary, const Tokens& tokens,
                           int max_len)
{
    if (max_len < 1) {
        throw Error("apply_phrases_vocab: max_len must be positive");
    }
    Tokens out;
    out.reserve(tokens.size());
    std::size_t i = 0;
    while (i < tokens.size()) {
        std::size_t matched = 1;
        auto longest = std::min<std::size_t>(static_cast<std::size_t>(max_len), tokens.size() - i);
        for (std::size_t len = longest; len >= 2; --len) {
            std::string candidate = tokens[i];
            for (std::size_t k = 1; k < len; ++k) {
                candidate += PhraseModel::delimiter();
                candidate += tokens[i + k];
            }
            if (in_vocabulary(candidate)) {
                out.push_back(std::move(candidate));
                matched = len;
                break;
            }
        }
        if (matched == 1) {
            out.push_back(tokens[i]);
        }
        i += matched;
    }
    return out;
}

} // namespace wombat
