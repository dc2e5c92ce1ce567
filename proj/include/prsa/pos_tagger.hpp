#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace prsa {

/// Penn-Treebank-style part-of-speech tagging over pre-tokenized text.
class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual std::vector<std::string> tag(const std::vector<std::string>& tokens) const = 0;
};

bool is_noun_tag(std::string_view tag);

/// Deterministic lexicon + suffix-rule tagger bundled with the toolkit.
///
/// Accuracy on the hand-labeled file tests/data/pos_gold.txt is documented
/// as kRuleTaggerGoldAccuracy; anything better (an external statistical
/// tagger) can be plugged in through PosTagger.
class RuleTagger final : public PosTagger {
 public:
  RuleTagger();

  std::vector<std::string> tag(const std::vector<std::string>& tokens) const override;

  /// Extends or overrides the lexicon, e.g. with domain vocabulary.
  void add_word(std::string word, std::string tag);

 private:
  std::string lexical_tag(const std::string& token, std::size_t index) const;

  std::unordered_map<std::string, std::string> lexicon_;
  std::unordered_set<std::string> noun_verb_;
};

/// Lower bound on RuleTagger token accuracy over tests/data/pos_gold.txt.
inline constexpr double kRuleTaggerGoldAccuracy = 0.95;

std::shared_ptr<const PosTagger> default_tagger();

}  // namespace prsa
