#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wombat {

using AttributeMap = std::map<std::string, std::string>;

/// The five attributes every WEC identifier must carry.
inline constexpr std::string_view kSystemKeys[] = {"algo", "dataset", "dims", "fold", "unit"};

/// Normalized attribute:value set that names exactly one WEC.
///
/// Keys are lowercase ASCII (`[a-z][a-z0-9_-]*`), values are non-empty and
/// may not contain whitespace, control bytes or any of `;:&{},`. The five
/// system keys are mandatory, `dims` must be a positive integer and `fold`
/// must be 0 or 1. Attribute order in the source text is irrelevant.
class WecIdentifier {
public:
    /// Validates and wraps an attribute map; throws GrammarError naming the
    /// offending key.
    static WecIdentifier from_attributes(AttributeMap attributes);

    const AttributeMap& attributes() const noexcept { return attributes_; }

    /// Value for `key`, or nullopt.
    std::optional<std::string_view> find(std::string_view key) const;

    const std::string& algo() const { return attributes_.at("algo"); }
    const std::string& dataset() const { return attributes_.at("dataset"); }
    const std::string& unit() const { return attributes_.at("unit"); }
    int dims() const;
    bool folded() const { return attributes_.at("fold") == "1"; }

    /// True when every pair in `filter` is present with the same value.
    bool matches(const AttributeMap& filter) const;

    /// `key:value` pairs joined by `;`, keys ascending.
    std::string normalized() const;

    /// Filesystem-safe, injective encoding of the normalized string:
    /// `:` becomes `=`, `;` becomes `.`, and every value byte outside
    /// `[A-Za-z0-9_-]` is written as `%XX`.
    std::string directory_name() const;

    friend bool operator==(const WecIdentifier&, const WecIdentifier&) = default;

private:
    explicit WecIdentifier(AttributeMap attributes) : attributes_(std::move(attributes)) {}
    AttributeMap attributes_;
};

/// Parses `key:value;key:value;...` (no brace sets).
WecIdentifier parse_identifier(std::string_view text);

/// Parses a partial `key:value;...` list with no required keys; used for
/// catalog filters. An empty or all-whitespace string yields an empty map.
AttributeMap parse_attribute_filter(std::string_view text);

std::string normalize(const WecIdentifier& id);

/// A `&`-joined list of specs, each possibly holding `{v1,...,vn}` sets.
struct WecQuery {
    std::vector<std::string> specs;
    std::vector<WecIdentifier> expanded;
};

/// Expands every spec into the Cartesian product of its brace sets (leftmost
/// set varies slowest) and concatenates specs in supplied order.
WecQuery parse_query(std::string_view text);

} // namespace wombat
