#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace prsa::text {

/// Splits text into word, punctuation and symbol tokens.
///
/// Words are runs of letters/digits (ASCII or non-symbol Unicode) with inner
/// apostrophes and hyphens kept. ASCII punctuation yields one token per
/// character. Emoji and other pictographic codepoints become standalone
/// tokens, with variation selectors and joiners attached to the preceding
/// symbol.
std::vector<std::string> tokenize(std::string_view s);

/// Word tokens only (drops punctuation and symbols).
std::vector<std::string> word_tokens(std::string_view s);

/// A single word token with its index in the full token stream.
struct IndexedWord {
  std::string word;
  std::size_t position = 0;
};
std::vector<IndexedWord> indexed_words(std::string_view s);

bool is_word(std::string_view token);
bool is_symbol(std::string_view token);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);

/// Lowercased, whitespace-collapsed form used for loose matching.
std::string normalize(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

/// Splits on line breaks and on sentence-final '.', '!' or '?' followed by
/// whitespace. Returns trimmed, non-empty sentences.
std::vector<std::string> split_sentences(std::string_view s);

/// Whitespace-delimited chunks, layout preserved by the caller via spans.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};
std::vector<Span> whitespace_spans(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_ci(std::string_view s, std::string_view prefix);

}  // namespace prsa::text
