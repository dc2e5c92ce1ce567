#include <algorithm>

#include "prsa/error.hpp"
#include "prsa/metrics.hpp"
#include "prsa/syntax.hpp"

namespace prsa {

Score output_score(const OutputGrid& surrogate, const OutputGrid& target, const BaseMetric& metric) {
  if (target.empty() || surrogate.size() != target.size()) {
    throw PreconditionError("output_score: surrogate and target grids must cover the same inputs");
  }
  const std::size_t m = target.front().size();
  if (m < 2) throw PreconditionError("output_score: needs at least two samples per input (m >= 2)");
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i].size() != m || surrogate[i].size() != m) {
      throw PreconditionError("output_score: every input needs exactly m samples in both grids");
    }
  }

  const double md = static_cast<double>(m);
  double sum = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    double numerator = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < m; ++k) numerator += metric(surrogate[i][j], target[i][k]);
    }
    numerator /= md * md;

    double denominator = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = j + 1; k < m; ++k) denominator += metric(target[i][j], target[i][k]);
    }
    denominator *= 2.0 / (md * (md - 1.0));
    if (denominator == 0.0) {
      throw DegenerateTargetsError("degenerate target outputs: target self-similarity is 0 for input " +
                                   std::to_string(i));
    }
    sum += numerator / denominator;
  }

  Score s;
  s.raw = sum / static_cast<double>(target.size());
  s.value = std::clamp(s.raw, kScoreFloor, 1.0);
  return s;
}

SimilarityTriple similarity_triple(const OutputGrid& surrogate, const OutputGrid& target,
                                   const SyntaxProvider& syntax) {
  SimilarityTriple t;
  const auto sem = output_score(surrogate, target, [](const std::string& c, const std::string& r) {
    return bleu(c, r);
  });
  bool fallback = false;
  const auto syn = output_score(surrogate, target, [&](const std::string& c, const std::string& r) {
    auto res = syntactic_similarity_detailed(c, r, syntax);
    fallback = fallback || res.fallback;
    return res.value;
  });
  const auto str = output_score(surrogate, target, [](const std::string& c, const std::string& r) {
    return structural_similarity(c, r);
  });
  t.semantic = sem.value;
  t.raw_semantic = sem.raw;
  t.syntactic = syn.value;
  t.raw_syntactic = syn.raw;
  t.structural = str.value;
  t.raw_structural = str.raw;
  t.syntax_fallback = fallback;
  return t;
}

bool attack_success(const SimilarityTriple& triple, const Thresholds& thresholds) {
  return triple.semantic >= thresholds.semantic && triple.syntactic >= thresholds.syntactic &&
         triple.structural >= thresholds.structural;
}

double asr(std::span<const SimilarityTriple> triples, const Thresholds& thresholds) {
  if (triples.empty()) throw PreconditionError("asr: empty result list");
  std::size_t hits = 0;
  for (const auto& t : triples) hits += attack_success(t, thresholds) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(triples.size());
}

double asr(std::span<const AttackResult> results) {
  if (results.empty()) throw PreconditionError("asr: empty result list");
  std::size_t hits = 0;
  for (const auto& r : results) hits += r.success ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

}  // namespace prsa
