#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace cloze {

inline constexpr std::string_view kPlaceholderToken = "@placeholder";
inline constexpr std::string_view kMarkerPrefix = "@entity";
inline constexpr std::string_view kUnkToken = "<unk>";

// Anonymized coreference-chain marker "@entity{n}".
struct EntityId {
  int index = 0;
  auto operator<=>(const EntityId&) const = default;
};

inline std::string marker(EntityId id) {
  return std::string(kMarkerPrefix) + std::to_string(id.index);
}

// Strict form: "@entity" followed by a canonical decimal (no leading zeros),
// so rendering then re-parsing is the identity and anything else is a word.
inline std::optional<EntityId> parse_marker(std::string_view token) {
  if (token.size() <= kMarkerPrefix.size() ||
      token.substr(0, kMarkerPrefix.size()) != kMarkerPrefix) {
    return std::nullopt;
  }
  std::string_view digits = token.substr(kMarkerPrefix.size());
  if (digits.size() > 1 && digits[0] == '0') return std::nullopt;
  long value = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
    if (value > 1000000000L) return std::nullopt;
  }
  return EntityId{static_cast<int>(value)};
}

inline bool is_entity_marker(std::string_view token) {
  return parse_marker(token).has_value();
}

inline bool is_placeholder(std::string_view token) {
  return token == kPlaceholderToken;
}

inline bool is_sentence_boundary(std::string_view token) {
  return token == "." || token == "!" || token == "?";
}

}  // namespace cloze
