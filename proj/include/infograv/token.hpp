#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace infograv {

/// Index into a Vocabulary. Id 0 is always the unknown-token symbol.
struct TokenId {
  std::uint32_t value = 0;

  constexpr TokenId() = default;
  constexpr explicit TokenId(std::uint32_t v) : value(v) {}
  constexpr explicit TokenId(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}

  constexpr std::size_t index() const noexcept { return value; }

  friend constexpr auto operator<=>(TokenId, TokenId) = default;
};

inline constexpr TokenId kUnkId{std::uint32_t{0}};

using TokenSeq = std::vector<TokenId>;

/// Probability floor applied after smoothing; keeps every potential finite.
inline constexpr double kProbFloor = 1e-12;

}  // namespace infograv

template <>
struct std::hash<infograv::TokenId> {
  std::size_t operator()(infograv::TokenId t) const noexcept {
    return std::hash<std::uint32_t>{}(t.value);
  }
};
