#include "wombat/identifier.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "wombat/error.hpp"
#include "text_util.hpp"

namespace wombat {

namespace {

constexpr std::string_view kReservedChars = ";:&{},";

bool valid_key(std::string_view key)
{
    if (key.empty() || key.front() < 'a' || key.front() > 'z') {
        return false;
    }
    return std::all_of(key.begin(), key.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
}

void check_value(std::string_view key, std::string_view value)
{
    if (value.empty()) {
        throw GrammarError("empty value for key '" + std::string(key) + "'");
    }
    for (char c : value) {
        auto u = static_cast<unsigned char>(c);
        if (u < 0x20 || u == 0x7f || u == ' ') {
            throw GrammarError("value for key '" + std::string(key) +
                               "' contains whitespace or a control character");
        }
        if (kReservedChars.find(c) != std::string_view::npos) {
            throw GrammarError("value for key '" + std::string(key) + "' contains reserved character '" +
                               std::string(1, c) + "'");
        }
    }
}

void check_key(std::string_view key)
{
    if (!valid_key(key)) {
        throw GrammarError("invalid key '" + std::string(key) + "' (expected [a-z][a-z0-9_-]*)");
    }
}

// One `key:value` or `key:{v1,...}` pair of a spec.
struct RawPair {
    std::string key;
    std::vector<std::string> values;
    bool is_set = false;
};

RawPair parse_pair(std::string_view text)
{
    text = detail::trim(text);
    if (text.empty()) {
        throw GrammarError("empty attribute pair");
    }
    auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw GrammarError("malformed pair '" + std::string(text) + "' (expected key:value)");
    }
    RawPair pair;
    pair.key = std::string(detail::trim(text.substr(0, colon)));
    check_key(pair.key);
    auto rest = detail::trim(text.substr(colon + 1));
    if (!rest.empty() && rest.front() == '{') {
        if (rest.size() < 2 || rest.back() != '}') {
            throw GrammarError("unterminated brace set for key '" + pair.key + "'");
        }
        auto inner = rest.substr(1, rest.size() - 2);
        if (inner.find_first_of("{}") != std::string_view::npos) {
            throw GrammarError("nested braces for key '" + pair.key + "'");
        }
        if (detail::trim(inner).empty()) {
            throw GrammarError("empty brace set for key '" + pair.key + "'");
        }
        pair.is_set = true;
        for (auto part : detail::split(inner, ',')) {
            auto value = detail::trim(part);
            check_value(pair.key, value);
            pair.values.emplace_back(value);
        }
    } else {
        check_value(pair.key, rest);
        pair.values.emplace_back(rest);
    }
    return pair;
}

std::vector<RawPair> parse_spec(std::string_view spec)
{
    std::vector<RawPair> pairs;
    std::set<std::string, std::less<>> seen;
    for (auto part : detail::split(spec, ';')) {
        auto pair = parse_pair(part);
        if (!seen.insert(pair.key).second) {
            throw GrammarError("duplicate key '" + pair.key + "'");
        }
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

bool is_plain_byte(char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-';
}

} // namespace

WecIdentifier WecIdentifier::from_attributes(AttributeMap attributes)
{
    for (const auto& [key, value] : attributes) {
        check_key(key);
        check_value(key, value);
    }
    for (auto key : kSystemKeys) {
        if (attributes.find(std::string(key)) == attributes.end()) {
            throw GrammarError("missing system key '" + std::string(key) + "'");
        }
    }
    const auto& dims = attributes.at("dims");
    int parsed = 0;
    auto [end, ec] = std::from_chars(dims.data(), dims.data() + dims.size(), parsed);
    if (ec != std::errc{} || end != dims.data() + dims.size() || parsed <= 0 || dims.front() == '0' ||
        dims.front() == '-' || dims.front() == '+') {
        throw GrammarError("invalid value '" + dims + "' for key 'dims' (expected a positive integer)");
    }
    const auto& fold = attributes.at("fold");
    if (fold != "0" && fold != "1") {
        throw GrammarError("invalid value '" + fold + "' for key 'fold' (expected 0 or 1)");
    }
    return WecIdentifier(std::move(attributes));
}

std::optional<std::string_view> WecIdentifier::find(std::string_view key) const
{
    auto it = attributes_.find(std::string(key));
    if (it == attributes_.end()) {
        return std::nullopt;
    }
    return std::string_view(it->second);
}

int WecIdentifier::dims() const
{
    const auto& text = attributes_.at("dims");
    int value = 0;
    std::from_chars(text.data(), text.data() + text.size(), value);
    return value;
}

bool WecIdentifier::matches(const AttributeMap& filter) const
{
    return std::all_of(filter.begin(), filter.end(), [this](const auto& kv) {
        auto it = attributes_.find(kv.first);
        return it != attributes_.end() && it->second == kv.second;
    });
}

std::string WecIdentifier::normalized() const
{
    std::string out;
    for (const auto& [key, value] : attributes_) {
        if (!out.empty()) {
            out += ';';
        }
        out += key;
        out += ':';
        out += value;
    }
    return out;
}

std::string WecIdentifier::directory_name() const
{
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (const auto& [key, value] : attributes_) {
        if (!out.empty()) {
            out += '.';
        }
        out += key;
        out += '=';
        for (char c : value) {
            if (is_plain_byte(c)) {
                out += c;
            } else {
                auto u = static_cast<unsigned char>(c);
                out += '%';
                out += kHex[u >> 4];
                out += kHex[u & 0xF];
            }
        }
    }
    return out;
}

WecIdentifier parse_identifier(std::string_view text)
{
    AttributeMap attributes;
    for (auto& pair : parse_spec(text)) {
        if (pair.is_set) {
            throw GrammarError("brace set for key '" + pair.key + "' is only allowed in queries");
        }
        attributes.emplace(std::move(pair.key), std::move(pair.values.front()));
    }
    return WecIdentifier::from_attributes(std::move(attributes));
}

AttributeMap parse_attribute_filter(std::string_view text)
{
    AttributeMap filter;
    if (detail::trim(text).empty()) {
        return filter;
    }
    for (auto& pair : parse_spec(text)) {
        if (pair.is_set) {
            throw GrammarError("brace set for key '" + pair.key + "' is not allowed in a filter");
        }
        filter.emplace(std::move(pair.key), std::move(pair.values.front()));
    }
    return filter;
}

std::string normalize(const WecIdentifier& id) { return id.normalized(); }

WecQuery parse_query(std::string_view text)
{
    WecQuery query;
    std::set<std::string> seen;
    for (auto part : detail::split(text, '&')) {
        auto spec = detail::trim(part);
        if (spec.empty()) {
            throw GrammarError("empty identifier spec in query");
        }
        query.specs.emplace_back(spec);
        auto pairs = parse_spec(spec);

        // Odometer over brace sets; the last pair varies fastest.
        std::vector<std::size_t> index(pairs.size(), 0);
        while (true) {
            AttributeMap attributes;
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                attributes.emplace(pairs[i].key, pairs[i].values[index[i]]);
            }
            auto id = WecIdentifier::from_attributes(std::move(attributes));
            auto normalized = id.normalized();
            if (!seen.insert(normalized).second) {
                throw GrammarError("duplicate identifier '" + normalized + "' in query");
            }
            query.expanded.push_back(std::move(id));

            std::size_t pos = pairs.size();
            while (pos > 0) {
                --pos;
                if (++index[pos] < pairs[pos].values.size()) {
                    break;
                }
                index[pos] = 0;
                if (pos == 0) {
                    pos = pairs.size() + 1;
                    break;
                }
            }
            if (pos == pairs.size() + 1 || pairs.empty()) {
                break;
            }
        }
    }
    if (query.expanded.empty()) {
        throw GrammarError("empty query");
    }
    return query;
}

} // namespace wombat
