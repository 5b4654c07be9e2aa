#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "token.hpp"

namespace infograv {

class Vocabulary {
 public:
  static constexpr std::string_view kUnkSurface = "<unk>";

  Vocabulary() : surfaces_{std::string(kUnkSurface)} { index_.emplace(surfaces_[0], kUnkId); }

  /// `surfaces[0]` must be the unknown symbol; the rest must be unique.
  explicit Vocabulary(std::vector<std::string> surfaces) : surfaces_(std::move(surfaces)) {
    if (surfaces_.empty() || surfaces_[0] != kUnkSurface) {
      throw ArgumentError("vocabulary must start with " + std::string(kUnkSurface));
    }
    for (std::size_t i = 0; i < surfaces_.size(); ++i) {
      if (!index_.emplace(surfaces_[i], TokenId{i}).second) {
        throw ArgumentError("duplicate vocabulary surface '" + surfaces_[i] + "'");
      }
    }
  }

  /// Unknown symbol first, then the distinct surfaces in byte order.
  static Vocabulary from_tokens(std::span<const std::string> tokens) {
    std::vector<std::string> uniq(tokens.begin(), tokens.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::erase(uniq, std::string(kUnkSurface));
    uniq.insert(uniq.begin(), std::string(kUnkSurface));
    return Vocabulary(std::move(uniq));
  }

  std::size_t size() const noexcept { return surfaces_.size(); }

  const std::string& surface(TokenId id) const {
    if (id.index() >= surfaces_.size()) throw ArgumentError("token id out of range");
    return surfaces_[id.index()];
  }

  bool contains(std::string_view s) const { return index_.find(s) != index_.end(); }

  /// Out-of-vocabulary surfaces map to the unknown id.
  TokenId lookup(std::string_view s) const {
    auto it = index_.find(s);
    return it == index_.end() ? kUnkId : it->second;
  }

  TokenSeq encode(std::span<const std::string> toks) const {
    TokenSeq out;
    out.reserve(toks.size());
    for (const auto& t : toks) out.push_back(lookup(t));
    return out;
  }

  std::vector<std::string> decode(std::span<const TokenId> ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (TokenId t : ids) out.push_back(surface(t));
    return out;
  }

  const std::vector<std::string>& surfaces() const noexcept { return surfaces_; }

 private:
  std::vector<std::string> surfaces_;
  std::map<std::string, TokenId, std::less<>> index_;
};

}  // namespace infograv
