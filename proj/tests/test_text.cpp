#include <doctest.h>

#include <fstream>
#include <sstream>

#include "prsa/pos_tagger.hpp"
#include "prsa/text.hpp"

using namespace prsa;
using V = std::vector<std::string>;

TEST_CASE("tokenize splits words, punctuation and emoji") {
  CHECK(text::tokenize("Hello, world!") == V{"Hello", ",", "world", "!"});
  CHECK(text::tokenize("don't stop-motion") == V{"don't", "stop-motion"});
  CHECK(text::tokenize("  ") == V{});
  CHECK(text::tokenize("#tag") == V{"#", "tag"});
  // Emoji are standalone tokens, even when glued to words.
  CHECK(text::tokenize("great\xF0\x9F\x8E\x89time") == V{"great", "\xF0\x9F\x8E\x89", "time"});
  // Variation selector stays attached.
  CHECK(text::tokenize("\xE2\x9C\xA8\xEF\xB8\x8F ok") == V{"\xE2\x9C\xA8\xEF\xB8\x8F", "ok"});
  CHECK(text::tokenize("caf\xC3\xA9 na\xC3\xAFve") == V{"caf\xC3\xA9", "na\xC3\xAFve"});
}

TEST_CASE("word tokens drop punctuation and symbols") {
  CHECK(text::word_tokens("Hi! \xF0\x9F\x98\x80 #fun, 42 times.") == V{"Hi", "fun", "42", "times"});
  const auto iw = text::indexed_words("a, b c");
  REQUIRE(iw.size() == 3);
  CHECK(iw[1].word == "b");
  CHECK(iw[1].position == 2);
}

TEST_CASE("normalization helpers") {
  CHECK(text::to_lower("MiXeD") == "mixed");
  CHECK(text::trim("  x y \n") == "x y");
  CHECK(text::collapse_whitespace(" a \n\t b  ") == "a b");
  CHECK(text::normalize(" Hello   World ") == "hello world");
  CHECK(text::starts_with_ci("Title: x", "title:"));
  CHECK_FALSE(text::starts_with_ci("Ti", "title"));
  CHECK(text::join({"a", "b", "c"}, "-") == "a-b-c");
}

TEST_CASE("sentence and line splitting") {
  CHECK(text::split_sentences("One. Two!\nThree? four") == V{"One.", "Two!", "Three?", "four"});
  CHECK(text::split_sentences("Version 2.5 is out.") == V{"Version 2.5 is out."});
  CHECK(text::split_lines("a\r\nb\n\nc") == V{"a", "b", "", "c"});
}

TEST_CASE("whitespace spans cover every chunk") {
  const std::string s = " ab  c\nd ";
  const auto spans = text::whitespace_spans(s);
  REQUIRE(spans.size() == 3);
  CHECK(s.substr(spans[0].begin, spans[0].end - spans[0].begin) == "ab");
  CHECK(s.substr(spans[2].begin, spans[2].end - spans[2].begin) == "d");
}

TEST_CASE("rule tagger basics") {
  const auto& tagger = *default_tagger();
  CHECK(tagger.tag({"The", "cat", "sat", "on", "the", "mat", "."}) == V{"DT", "NN", "VBD", "IN", "DT", "NN", "."});
  CHECK(tagger.tag({"coffee", "grinder"}) == V{"NN", "NN"});
  CHECK(tagger.tag({"Write", "a", "poem"}) == V{"VB", "DT", "NN"});
  CHECK(is_noun_tag("NNPS"));
  CHECK_FALSE(is_noun_tag("VB"));

  RuleTagger custom;
  custom.add_word("frobnicate", "VB");
  CHECK(custom.tag({"frobnicate"}) == V{"VB"});
}

TEST_CASE("rule tagger accuracy on the gold file") {
  std::ifstream in(std::string(PRSA_TEST_DATA) + "/pos_gold.txt");
  REQUIRE(in);
  std::size_t correct = 0, total = 0, sentences = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++sentences;
    std::istringstream ss(line);
    V words, gold;
    for (std::string tok; ss >> tok;) {
      const auto slash = tok.rfind('/');
      words.push_back(tok.substr(0, slash));
      gold.push_back(tok.substr(slash + 1));
    }
    const auto tags = default_tagger()->tag(words);
    REQUIRE(tags.size() == gold.size());
    for (std::size_t i = 0; i < tags.size(); ++i) correct += tags[i] == gold[i] ? 1 : 0;
    total += tags.size();
  }
  CHECK(sentences == 30);
  const double accuracy = static_cast<double>(correct) / static_cast<double>(total);
  MESSAGE("tagger accuracy " << accuracy);
  CHECK(accuracy >= kRuleTaggerGoldAccuracy);
}
