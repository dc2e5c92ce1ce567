#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prsa/core.hpp"
#include "prsa/embedding.hpp"
#include "prsa/gateway.hpp"
#include "prsa/pos_tagger.hpp"

namespace prsa {

struct PruneConfig {
  double similarity_threshold = 0.4;  // gamma
  double truncation = 0.6;            // alpha
  int beam_size = 2;                  // b
  int eval_frequency = 5;             // e
  std::string placeholder = "{}";

  void validate() const;
};

struct Candidate {
  std::string word;
  double similarity = 0.0;
  std::vector<std::size_t> positions;  // token indices in the prompt
};

/// Sorted by similarity descending, ties by first position.
using CandidateList = std::vector<Candidate>;

/// Unique case-folded nouns of `x` in order of first occurrence.
std::vector<std::string> extract_nouns(std::string_view x, const PosTagger& tagger = *default_tagger());

/// Prompt words whose best cosine to any noun reaches gamma. Words missing
/// from the index, and the placeholder itself, are skipped.
CandidateList candidate_related_words(std::string_view prompt, std::span<const std::string> nouns,
                                      const EmbeddingIndex& index, double gamma,
                                      std::string_view placeholder = "{}");

using BeamEvaluator = std::function<double(const std::vector<std::string>&)>;

struct BeamStep {
  std::vector<std::string> prefix;
  double score = 0.0;
  std::string error;  // set when the evaluator threw; score is then -inf
};

/// Selective beam search over prefixes of the ranked candidate list.
std::vector<std::string> select_mask_words(const CandidateList& candidates, const BeamEvaluator& evaluate,
                                           double alpha, int beam_size, int eval_frequency,
                                           std::vector<BeamStep>* trace = nullptr);

/// Whole-word, case-insensitive replacement of each word by `placeholder`.
SurrogatePrompt mask_prompt(std::string_view prompt, std::span<const std::string> words,
                            std::string_view placeholder = "{}");

/// Scores a word list by masking it, completing on each example input and
/// averaging BLEU against the example output.
BeamEvaluator beam_evaluator_for(Backend& target, std::string prompt, std::vector<IOPair> examples,
                                 std::string placeholder = "{}");

struct PruneOutcome {
  SurrogatePrompt prompt;
  std::vector<std::string> nouns;
  CandidateList candidates;
  std::vector<BeamStep> trace;
};

/// Nouns -> candidates -> beam search -> mask, against the given examples.
PruneOutcome prune_surrogate(std::string_view prompt, std::span<const IOPair> examples, Backend& target,
                             const EmbeddingIndex& index, const PruneConfig& config,
                             const PosTagger& tagger = *default_tagger());

void to_json(json& j, const PruneConfig& c);
void from_json(const json& j, PruneConfig& c);

}  // namespace prsa
