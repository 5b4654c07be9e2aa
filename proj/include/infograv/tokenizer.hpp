#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace infograv {

namespace detail {

inline bool is_split_punct(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';':
    case ':': case '"': case '(': case ')': case '\'':
      return true;
    default:
      return false;
  }
}

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace detail

/// Lowercases ASCII letters, splits on whitespace and emits each of
/// . , ! ? ; : " ( ) ' as a standalone token. Bytes >= 0x80 pass through
/// unchanged, so multi-byte UTF-8 sequences stay intact.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  };
  for (char c : text) {
    if (detail::is_space(c)) {
      flush();
    } else if (detail::is_split_punct(c)) {
      flush();
      out.emplace_back(1, c);
    } else {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

inline std::string join_tokens(const std::vector<std::string>& toks) {
  std::string s;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) s.push_back(' ');
    s += toks[i];
  }
  return s;
}

}  // namespace infograv
