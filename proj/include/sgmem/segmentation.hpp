#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace sgmem {

namespace detail {

// Tokens that end with a period but do not close a sentence. Compared
// lowercase with trailing periods stripped, so "U.S." matches "u.s".
inline const std::unordered_set<std::string>& sentence_abbreviations() {
  static const std::unordered_set<std::string> abbrevs = {
      "mr",  "mrs", "dr",  "prof", "e.g", "i.e", "etc",
      "jan", "feb", "mar", "apr",  "may", "jun", "jul",
      "aug", "sep", "sept", "oct", "nov", "dec", "u.s"};
  return abbrevs;
}

inline bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline bool opens_sentence(char c) {
  unsigned char uc = static_cast<unsigned char>(c);
  return std::isupper(uc) != 0 || std::isdigit(uc) != 0 || c == '"' || c == '\'';
}

// The maximal non-space run ending at `end` (inclusive), lowercased, with
// trailing periods stripped.
inline std::string token_before(std::string_view text, size_t end) {
  size_t start = end;
  while (start > 0 && !is_space(text[start - 1])) --start;
  size_t stop = end + 1;
  while (stop > start && text[stop - 1] == '.') --stop;
  std::string token;
  token.reserve(stop - start);
  for (size_t i = start; i < stop; ++i) {
    token.push_back(static_cast<char>(
        std::tolower(static_cast<unsigned char>(text[i]))));
  }
  return token;
}

}  // namespace detail

inline std::string trim_copy(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && detail::is_space(s[b])) ++b;
  while (e > b && detail::is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// Collapses whitespace runs to single spaces and trims the ends. Used by the
// reconstruction check: joining the segmented sentences with single spaces
// must reproduce the normalized source text.
inline std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (detail::is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

// Rule-based sentence splitter. A boundary is a '.', '!' or '?' followed by
// whitespace and then an uppercase letter, digit or quote. Periods that end
// a known abbreviation or sit inside an ellipsis never split. Text with no
// boundary comes back as a single sentence.
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  size_t begin = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (c == '.' && i + 1 < text.size() && text[i + 1] == '.') continue;
    size_t next = i + 1;
    if (next >= text.size() || !detail::is_space(text[next])) continue;
    while (next < text.size() && detail::is_space(text[next])) ++next;
    if (next >= text.size()) continue;
    if (!detail::opens_sentence(text[next])) continue;
    if (c == '.') {
      std::string token = detail::token_before(text, i);
      if (detail::sentence_abbreviations().count(token) > 0) continue;
    }
    std::string piece = trim_copy(text.substr(begin, i + 1 - begin));
    if (!piece.empty()) sentences.push_back(std::move(piece));
    begin = next;
  }
  std::string tail = trim_copy(text.substr(begin));
  if (!tail.empty()) sentences.push_back(std::move(tail));
  if (sentences.empty()) {
    std::string whole = trim_copy(text);
    if (!whole.empty()) sentences.push_back(std::move(whole));
  }
  return sentences;
}

}  // namespace sgmem
