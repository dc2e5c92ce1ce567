#include "prsa/pos_tagger.hpp"

#include <cctype>
#include <utility>

#include "prsa/text.hpp"

namespace prsa {

namespace {

struct Entry {
  const char* tag;
  const char* words;
};

// Closed-class words and frequent open-class words. Space separated.
constexpr Entry kLexicon[] = {
    {"DT", "a an the this that these those every each another some any no all both either neither"},
    {"PRP", "i you he she it we they me him her us them myself yourself itself ourselves themselves"},
    {"PRP$", "my your his its our their"},
    {"WP", "who whom what"},
    {"WDT", "which whatever"},
    {"WRB", "when where why how"},
    {"IN", "of in on at by for with about from into onto over under between through during "
           "before after above below without within across against among around behind beyond "
           "near since until upon via per than like because although though while if whether"},
    {"TO", "to"},
    {"CC", "and or but nor yet plus"},
    {"MD", "can could will would shall should may might must"},
    {"EX", "there"},
    {"RP", "up out off"},
    {"UH", "hey hello hi oh wow yes ok okay please"},
    {"VBZ", "is has does says makes gives takes goes comes gets seems looks works feels"},
    {"VBP", "am are have do"},
    {"VBD", "was were had did said made gave took went came got saw found told felt thought "
            "became left began knew kept brought wrote sat ran stood bought sold slept ate drank "
            "paid met sent spent built held heard lost won sang taught caught fought"},
    {"VBN", "been done given taken gone seen known written shown chosen built designed "
            "crafted engineered written"},
    {"VBG", "being having doing making going getting"},
    {"VB", "be go get give take see know find tell ask seem feel try leave call keep let "
           "begin show hear play run move live believe bring happen write provide sit stand "
           "lose pay meet include continue set learn change lead understand watch follow stop "
           "create speak read allow add spend grow open walk win offer remember consider appear "
           "buy wait serve die send expect build stay fall cut reach kill remain suggest raise "
           "pass sell require report decide pull generate compose craft explore discover enjoy "
           "grab order visit acquire invite present organize summarize translate describe "
           "explain start make bake cook mix stir chop boil fry slice pour whisk"},
    {"JJ", "good new first last long great little own other old right big high different small "
           "large next early young important few public bad same able best better sure free "
           "full special easy clear recent certain personal open red difficult available likely "
           "short single medical current wrong private past foreign fine common poor natural "
           "significant similar hot dead central happy serious ready simple left physical "
           "general environmental financial blue democratic dark various entire close legal "
           "religious cold final main green nice huge popular traditional cultural formal "
           "casual colloquial relevant attractive engaging perfect wonderful awesome amazing "
           "super fresh quick real fair warm bright deep gentle busy curious everyday key "
           "delicious crispy tender golden lovely exceptional reliable professional detailed "
           "brief concise target potential mutual creative catchy friendly modern classic "
           "healthy spicy sweet sunny quiet fast slow soft loud rainy cloudy windy cheap rich "
           "smooth strong light heavy calm cozy"},
    {"RB", "not very also just only now then so too well even back still here there never "
           "always often really almost already soon quite rather again once ever together "
           "away maybe perhaps honestly carefully truly simply kinda online abroad overseas"},
    {"JJR", "more less"},
    {"JJS", "most least"},
    {"CD", "one two three four five six seven eight nine ten eleven twelve twenty thirty forty "
           "fifty sixty seventy eighty ninety hundred thousand million"},
    {"NN", "time person year way day thing man world life hand part child eye woman place "
           "work week case point government company number group problem fact copy email "
           "recipe guide song text prompt title tone audience content product information "
           "quality price detail difference heart light journey city place dish taste kitchen "
           "oven cat mat dog house car phone industry partner team market business music "
           "travel food study language idea game health fashion sport writing translation "
           "code data love news story morning night summer winter spring ocean rain road "
           "highway freedom coffee tea bread water weather hotel beach mountain river "
           "overview point element invitation lyrics garlic basil salt pepper sugar butter "
           "cheese chicken rice pasta flour"},
    {"NNS", "people years days things times men women children tags hashtags icons emojis "
            "headings points bullets ideas products customers readers friends folks details "
            "benefits features lyrics"},
};

// Words that are nouns by default but verbs in imperative/infinitive slots.
constexpr const char* kNounVerb =
    "copy use love work plan design list order need help start name show cause change "
    "end report return visit travel study code love taste cook guide feature benefit "
    "email title rain question answer book mix watch";

struct Suffix {
  const char* suffix;
  const char* tag;
  std::size_t min_len;
};

constexpr Suffix kSuffixes[] = {
    {"ness", "NN", 6},  {"ment", "NN", 6},  {"tion", "NN", 6},  {"sion", "NN", 6},
    {"ship", "NN", 6},  {"ity", "NN", 5},   {"ism", "NN", 5},   {"ist", "NN", 5},
    {"ance", "NN", 6},  {"ence", "NN", 6},  {"ly", "RB", 4},    {"ous", "JJ", 5},
    {"ful", "JJ", 5},   {"less", "JJ", 6},  {"able", "JJ", 6},  {"ible", "JJ", 6},
    {"ive", "JJ", 5},   {"ical", "JJ", 6},  {"ic", "JJ", 5},    {"ish", "JJ", 5},
    {"ing", "VBG", 5},  {"ed", "VBD", 4},   {"ize", "VB", 5},   {"ise", "VB", 6},
    {"er", "NN", 4},    {"or", "NN", 4},    {"ss", "NN", 3},    {"us", "NN", 4},
    {"s", "NNS", 4},
};

bool ends_with(const std::string& s, std::string_view suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

bool all_digits(const std::string& s) {
  bool digit = false;
  for (char c : s) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c != '.' && c != ',' && c != '-') {
      return false;
    }
  }
  return digit;
}

std::string punct_tag(const std::string& t) {
  if (t == "." || t == "!" || t == "?") return ".";
  if (t == ",") return ",";
  if (t == ":" || t == ";" || t == "-" || t == "\xE2\x80\x94" || t == "\xE2\x80\x93") return ":";
  if (t == "#") return "#";
  if (t == "$") return "$";
  if (t == "(" || t == "[" || t == "{") return "-LRB-";
  if (t == ")" || t == "]" || t == "}") return "-RRB-";
  if (t == "\"" || t == "'" || t == "`") return "''";
  return "SYM";
}

}  // namespace

bool is_noun_tag(std::string_view tag) {
  return tag == "NN" || tag == "NNS" || tag == "NNP" || tag == "NNPS";
}

RuleTagger::RuleTagger() {
  for (const auto& e : kLexicon) {
    for (auto& w : text::word_tokens(e.words)) {
      lexicon_.try_emplace(w, e.tag);
    }
  }
  for (auto& w : text::word_tokens(kNounVerb)) noun_verb_.insert(w);
}

void RuleTagger::add_word(std::string word, std::string tag) {
  lexicon_[text::to_lower(word)] = std::move(tag);
}

std::string RuleTagger::lexical_tag(const std::string& token, std::size_t index) const {
  if (!text::is_word(token)) return punct_tag(token);
  if (all_digits(token)) return "CD";
  const std::string lower = text::to_lower(token);
  const bool capitalized = std::isupper(static_cast<unsigned char>(token[0])) != 0;
  if (auto it = lexicon_.find(lower); it != lexicon_.end()) {
    // A capitalized known common word mid-sentence is still that word; only
    // unknown capitalized words become proper nouns.
    return it->second;
  }
  if (noun_verb_.count(lower)) return "NN";
  if (capitalized && index > 0) return "NNP";
  bool all_upper = token.size() > 1;
  for (char c : token) {
    if (std::islower(static_cast<unsigned char>(c))) all_upper = false;
  }
  if (all_upper) return "NNP";
  for (const auto& s : kSuffixes) {
    if (lower.size() >= s.min_len && ends_with(lower, s.suffix)) return s.tag;
  }
  return capitalized ? "NNP" : "NN";
}

std::vector<std::string> RuleTagger::tag(const std::vector<std::string>& tokens) const {
  std::vector<std::string> tags;
  tags.reserve(tokens.size());
  std::size_t sentence_index = 0;
  for (const auto& tok : tokens) {
    tags.push_back(lexical_tag(tok, sentence_index));
    sentence_index = (tags.back() == ".") ? 0 : sentence_index + 1;
  }

  // Context repairs.
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string lower = text::to_lower(tokens[i]);
    const std::string prev = i > 0 ? tags[i - 1] : std::string(".");
    const std::string next = i + 1 < tokens.size() ? tags[i + 1] : std::string(".");

    if (noun_verb_.count(lower) && (tags[i] == "NN" || tags[i] == "VB")) {
      const bool verb_slot = prev == "TO" || prev == "MD" ||
                             ((prev == "." || prev == ":" || prev == "UH" || prev == ",") &&
                              (next == "DT" || next == "PRP$" || next == "PRP" || next == "JJ" ||
                               next == "IN" || next == "RB" || next == "NNS" || next == "NN"));
      if (verb_slot) {
        tags[i] = "VB";
      } else if (prev == "PRP" || prev == "NNS") {
        tags[i] = (prev == "PRP" && (text::to_lower(tokens[i - 1]) == "he" ||
                                     text::to_lower(tokens[i - 1]) == "she" ||
                                     text::to_lower(tokens[i - 1]) == "it"))
                      ? "VBZ"
                      : "VBP";
      } else {
        tags[i] = "NN";
      }
    }
    // Present-tense plural subjects: "dogs bark".
    if (tags[i] == "NN" && (prev == "NNS" || prev == "PRP") && !noun_verb_.count(lower) &&
        (next == "." || next == "DT" || next == "RB" || next == "IN")) {
      if (i > 0 && lexicon_.count(lower) == 0) tags[i] = "VBP";
    }
    // Third-person verb after a singular subject when no verb has appeared yet:
    // "the hotel offers free breakfast".
    if (tags[i] == "NNS" && lexicon_.count(lower) == 0 && i > 0 &&
        (prev == "NN" || prev == "NNP") &&
        (next == "DT" || next == "PRP$" || next == "JJ" || next == "CD" || next == "RB")) {
      bool verb_seen = false;
      for (std::size_t k = i; k-- > 0 && tags[k] != ".";) {
        if (tags[k].starts_with("VB") || tags[k] == "MD") verb_seen = true;
      }
      if (!verb_seen) tags[i] = "VBZ";
    }
    // "-ing"/"-ed" words directly before a noun act as modifiers.
    if ((tags[i] == "VBG" || tags[i] == "VBD") && is_noun_tag(next) &&
        (prev == "DT" || prev == "JJ" || prev == "PRP$" || prev == "IN" || prev == ".")) {
      tags[i] = "JJ";
    }
    // Past participle after a form of "be"/"have".
    if (tags[i] == "VBD" && i > 0) {
      const std::string p = text::to_lower(tokens[i - 1]);
      if (p == "is" || p == "are" || p == "was" || p == "were" || p == "been" || p == "be" ||
          p == "has" || p == "have" || p == "had") {
        tags[i] = "VBN";
      }
    }
    // Gerund after a determiner is nominal.
    if (tags[i] == "VBG" && (prev == "DT" || prev == "PRP$") && !is_noun_tag(next)) {
      tags[i] = "NN";
    }
    // Base verb after a pronoun subject.
    if (tags[i] == "VB" && i > 0 && prev == "PRP") {
      const std::string p = text::to_lower(tokens[i - 1]);
      if (p == "he" || p == "she" || p == "it") {
        tags[i] = "VBZ";
      } else if (p == "i" || p == "you" || p == "we" || p == "they") {
        tags[i] = "VBP";
      }
    }
  }
  return tags;
}

std::shared_ptr<const PosTagger> default_tagger() {
  static const auto tagger = std::make_shared<const RuleTagger>();
  return tagger;
}

}  // namespace prsa
