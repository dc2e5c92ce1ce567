#include "prsa/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "prsa/error.hpp"
#include "prsa/metrics.hpp"
#include "prsa/text.hpp"

namespace prsa {

void PruneConfig::validate() const {
  if (!(similarity_threshold >= -1.0 && similarity_threshold <= 1.0)) {
    throw ConfigError("pruning: similarity threshold must lie in [-1, 1]");
  }
  if (!(truncation > 0.0 && truncation <= 1.0)) throw ConfigError("pruning: truncation factor must lie in (0, 1]");
  if (beam_size < 1) throw ConfigError("pruning: beam size must be positive");
  if (eval_frequency < 1) throw ConfigError("pruning: evaluation frequency must be positive");
  if (placeholder.empty()) throw ConfigError("pruning: placeholder must not be empty");
}

std::vector<std::string> extract_nouns(std::string_view x, const PosTagger& tagger) {
  const auto tokens = text::tokenize(x);
  if (tokens.empty()) return {};
  const auto tags = tagger.tag(tokens);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!text::is_word(tokens[i]) || !is_noun_tag(tags[i])) continue;
    std::string w = text::to_lower(tokens[i]);
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(std::move(w));
  }
  return out;
}

CandidateList candidate_related_words(std::string_view prompt, std::span<const std::string> nouns,
                                      const EmbeddingIndex& index, double gamma, std::string_view placeholder) {
  if (nouns.empty()) return {};
  std::vector<std::string> keys;
  std::map<std::string, Candidate> by_word;
  for (const auto& iw : text::indexed_words(prompt)) {
    if (iw.word == placeholder) continue;
    const std::string key = text::to_lower(iw.word);
    if (auto it = by_word.find(key); it != by_word.end()) {
      it->second.positions.push_back(iw.position);
      continue;
    }
    if (!index.find(iw.word)) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& k : nouns) {
      if (auto s = index.similarity(iw.word, k)) best = std::max(best, *s);
    }
    if (!(best >= gamma)) continue;
    keys.push_back(key);
    by_word.emplace(key, Candidate{iw.word, best, {iw.position}});
  }
  CandidateList out;
  for (const auto& k : keys) out.push_back(std::move(by_word.at(k)));
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& a, const Candidate& b) { return a.similarity > b.similarity; });
  return out;
}

std::vector<std::string> select_mask_words(const CandidateList& candidates, const BeamEvaluator& evaluate,
                                           double alpha, int beam_size, int eval_frequency,
                                           std::vector<BeamStep>* trace) {
  if (candidates.empty()) return {};
  if (!(alpha > 0.0 && alpha <= 1.0) || beam_size < 1 || eval_frequency < 1) {
    throw PreconditionError("select_mask_words: need alpha in (0,1], b >= 1, e >= 1");
  }
  const std::size_t n = candidates.size();
  // Round up, guarding against 0.6 * 5 landing a hair above 3.
  auto top = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n) - 1e-9));
  top = std::clamp<std::size_t>(top, 1, n);
  const std::size_t step = std::max<std::size_t>(1, top / static_cast<std::size_t>(eval_frequency));

  std::vector<BeamStep> beams;
  for (std::size_t i = 1; i <= top; i += step) {
    BeamStep s;
    for (std::size_t k = 0; k < i; ++k) s.prefix.push_back(candidates[k].word);
    try {
      s.score = evaluate(s.prefix);
    } catch (const std::exception& e) {
      s.score = -std::numeric_limits<double>::infinity();
      s.error = e.what();
    }
    if (trace) trace->push_back(s);
    beams.push_back(std::move(s));
    std::stable_sort(beams.begin(), beams.end(),
                     [](const BeamStep& a, const BeamStep& b) { return a.score > b.score; });
    if (beams.size() > static_cast<std::size_t>(beam_size)) beams.resize(static_cast<std::size_t>(beam_size));
  }
  return beams.front().prefix;
}

namespace {

bool wordish(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool joined(std::string_view s, std::size_t connector, bool backwards) {
  const char c = s[connector];
  if (c != '\'' && c != '-') return false;
  if (backwards) return connector > 0 && wordish(static_cast<unsigned char>(s[connector - 1]));
  return connector + 1 < s.size() && wordish(static_cast<unsigned char>(s[connector + 1]));
}

bool equal_ci(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace

SurrogatePrompt mask_prompt(std::string_view prompt, std::span<const std::string> words,
                            std::string_view placeholder) {
  SurrogatePrompt out;
  out.text = std::string(prompt);
  for (const auto& w : words) {
    if (w.empty() || equal_ci(w, placeholder)) continue;
    std::string next;
    std::size_t i = 0;
    bool hit = false;
    const std::string& s = out.text;
    while (i < s.size()) {
      const bool left_ok = i == 0 || (!wordish(static_cast<unsigned char>(s[i - 1])) && !joined(s, i - 1, true));
      if (left_ok && i + w.size() <= s.size() && equal_ci(std::string_view(s).substr(i, w.size()), w)) {
        const std::size_t end = i + w.size();
        const bool right_ok =
            end == s.size() || (!wordish(static_cast<unsigned char>(s[end])) && !joined(s, end, false));
        if (right_ok) {
          next += placeholder;
          ++out.placeholder_count;
          hit = true;
          i = end;
          continue;
        }
      }
      next += s[i++];
    }
    out.text = std::move(next);
    if (hit) out.masked_words.push_back(w);
  }
  return out;
}

BeamEvaluator beam_evaluator_for(Backend& target, std::string prompt, std::vector<IOPair> examples,
                                 std::string placeholder) {
  if (examples.empty()) throw PreconditionError("beam evaluator: no examples");
  return [&target, prompt = std::move(prompt), examples = std::move(examples),
          placeholder = std::move(placeholder)](const std::vector<std::string>& words) {
    const std::string masked = mask_prompt(prompt, words, placeholder).text;
    double sum = 0.0;
    for (const auto& ex : examples) sum += bleu(complete(target, masked, ex.input), ex.output);
    return sum / static_cast<double>(examples.size());
  };
}

PruneOutcome prune_surrogate(std::string_view prompt, std::span<const IOPair> examples, Backend& target,
                             const EmbeddingIndex& index, const PruneConfig& config, const PosTagger& tagger) {
  config.validate();
  PruneOutcome out;
  for (const auto& ex : examples) {
    for (auto& n : extract_nouns(ex.input, tagger)) {
      if (std::find(out.nouns.begin(), out.nouns.end(), n) == out.nouns.end()) out.nouns.push_back(std::move(n));
    }
  }
  out.candidates =
      candidate_related_words(prompt, out.nouns, index, config.similarity_threshold, config.placeholder);
  std::vector<std::string> chosen;
  if (!out.candidates.empty()) {
    auto evaluate = beam_evaluator_for(target, std::string(prompt),
                                       std::vector<IOPair>(examples.begin(), examples.end()), config.placeholder);
    chosen = select_mask_words(out.candidates, evaluate, config.truncation, config.beam_size,
                               config.eval_frequency, &out.trace);
  }
  out.prompt = mask_prompt(prompt, chosen, config.placeholder);
  return out;
}

void to_json(json& j, const PruneConfig& c) {
  j = json{{"similarity_threshold", c.similarity_threshold},
           {"truncation", c.truncation},
           {"beam_size", c.beam_size},
           {"eval_frequency", c.eval_frequency},
           {"placeholder", c.placeholder}};
}

void from_json(const json& j, PruneConfig& c) {
  c.similarity_threshold = j.value("similarity_threshold", c.similarity_threshold);
  c.truncation = j.value("truncation", c.truncation);
  c.beam_size = j.value("beam_size", c.beam_size);
  c.eval_frequency = j.value("eval_frequency", c.eval_frequency);
  c.placeholder = j.value("placeholder", c.placeholder);
}

}  // namespace prsa
