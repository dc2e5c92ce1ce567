#include "prsa/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>

namespace prsa::text {

namespace {

struct Codepoint {
  char32_t value = 0;
  std::size_t length = 1;
};

Codepoint decode(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> char32_t {
    if (i + k >= s.size()) return 0;
    return static_cast<unsigned char>(s[i + k]) & 0x3Fu;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0 && i + 1 < s.size()) {
    return {((b0 & 0x1Fu) << 6) | cont(1), 2};
  }
  if ((b0 & 0xF0) == 0xE0 && i + 2 < s.size()) {
    return {((b0 & 0x0Fu) << 12) | (cont(1) << 6) | cont(2), 3};
  }
  if ((b0 & 0xF8) == 0xF0 && i + 3 < s.size()) {
    return {((b0 & 0x07u) << 18) | (cont(1) << 12) | (cont(2) << 6) | cont(3), 4};
  }
  return {0xFFFD, 1};
}

bool is_joiner(char32_t c) {
  return c == 0x200D || (c >= 0xFE00 && c <= 0xFE0F) || (c >= 0x1F3FB && c <= 0x1F3FF);
}

bool is_symbol_cp(char32_t c) {
  return (c >= 0x2190 && c <= 0x2BFF) || (c >= 0x1F000 && c <= 0x1FAFF) ||
         (c >= 0x2600 && c <= 0x27BF) || c == 0x00A9 || c == 0x00AE || c == 0x2122;
}

bool is_punct_cp(char32_t c) {
  return (c >= 0x2000 && c <= 0x206F) || (c >= 0x3000 && c <= 0x303F) ||
         (c >= 0x00A0 && c <= 0x00BF) || c == 0x00D7 || c == 0x00F7;
}

enum class Kind { space, word, punct, symbol, joiner };

Kind classify(char32_t c) {
  if (c < 0x80) {
    if (std::isspace(static_cast<int>(c))) return Kind::space;
    if (std::isalnum(static_cast<int>(c)) || c == '_') return Kind::word;
    return Kind::punct;
  }
  if (c == 0x00A0 || c == 0x3000) return Kind::space;
  if (is_joiner(c)) return Kind::joiner;
  if (is_symbol_cp(c)) return Kind::symbol;
  if (is_punct_cp(c)) return Kind::punct;
  return Kind::word;
}

bool is_inner_connector(char32_t c) { return c == '\'' || c == '-' || c == 0x2019; }

}  // namespace

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      out.push_back(std::move(word));
      word.clear();
    }
  };
  std::size_t i = 0;
  while (i < s.size()) {
    const Codepoint cp = decode(s, i);
    const Kind kind = classify(cp.value);
    const std::string_view raw = s.substr(i, cp.length);
    switch (kind) {
      case Kind::space:
        flush();
        break;
      case Kind::word:
        word.append(raw);
        break;
      case Kind::joiner:
        if (!word.empty()) {
          word.append(raw);
        } else if (!out.empty() && is_symbol(out.back())) {
          out.back().append(raw);
        }
        break;
      case Kind::symbol:
        flush();
        if (!out.empty() && is_symbol(out.back()) && i >= 3) {
          // Glue ZWJ sequences: previous symbol ended with a joiner.
          const auto& prev = out.back();
          if (prev.size() >= 3 && prev.compare(prev.size() - 3, 3, "\xE2\x80\x8D") == 0) {
            out.back().append(raw);
            break;
          }
        }
        out.emplace_back(raw);
        break;
      case Kind::punct: {
        if (!word.empty() && is_inner_connector(cp.value)) {
          const std::size_t next = i + cp.length;
          if (next < s.size() && classify(decode(s, next).value) == Kind::word) {
            word.append(raw);
            break;
          }
        }
        flush();
        out.emplace_back(raw);
        break;
      }
    }
    i += cp.length;
  }
  flush();
  return out;
}

bool is_word(std::string_view token) {
  if (token.empty()) return false;
  return classify(decode(token, 0).value) == Kind::word;
}

bool is_symbol(std::string_view token) {
  if (token.empty()) return false;
  return classify(decode(token, 0).value) == Kind::symbol;
}

std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : tokenize(s)) {
    if (is_word(t)) out.push_back(std::move(t));
  }
  return out;
}

std::vector<IndexedWord> indexed_words(std::string_view s) {
  std::vector<IndexedWord> out;
  auto tokens = tokenize(s);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_word(tokens[i])) out.push_back({std::move(tokens[i]), i});
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

std::string normalize(std::string_view s) { return to_lower(collapse_whitespace(s)); }

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t nl = s.find('\n', start);
    if (nl == std::string_view::npos) nl = s.size();
    std::string_view line = s.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    start = nl + 1;
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& line : split_lines(s)) {
    std::size_t start = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (c != '.' && c != '!' && c != '?') continue;
      const bool at_end = i + 1 == line.size();
      if (at_end || std::isspace(static_cast<unsigned char>(line[i + 1]))) {
        auto piece = trim(std::string_view(line).substr(start, i + 1 - start));
        if (!piece.empty()) out.push_back(std::move(piece));
        start = i + 1;
      }
    }
    auto rest = trim(std::string_view(line).substr(std::min(start, line.size())));
    if (!rest.empty()) out.push_back(std::move(rest));
  }
  return out;
}

std::vector<Span> whitespace_spans(std::string_view s) {
  std::vector<Span> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    out.push_back({i, j});
    i = j;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace prsa::text
