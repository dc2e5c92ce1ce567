#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prsa/core.hpp"

namespace prsa {

class SyntaxProvider;

// ---------------------------------------------------------------------------
// Base metrics

/// Sentence-level BLEU-4 with uniform weights, brevity penalty and add-one
/// smoothing of the 2..4-gram precisions. Tokens are case-preserved.
///
/// Returns 0 for an empty candidate or when no unigram matches. Throws
/// PreconditionError when `references` is empty.
double bleu(std::string_view candidate, std::span<const std::string> references);
double bleu(std::string_view candidate, std::string_view reference);

double bleu_tokens(const std::vector<std::string>& candidate,
                   const std::vector<std::vector<std::string>>& references);

/// Jensen-Shannon divergence (base 2, range [0,1]) of the case-folded unigram
/// distributions of two texts. Both empty -> PreconditionError; exactly one
/// empty -> 1.
double js_divergence(std::string_view a, std::string_view b);

/// JS divergence over explicit count maps; exposed for oracle tests.
double js_divergence_counts(const std::map<std::string, double>& p,
                            const std::map<std::string, double>& q);

inline constexpr double kStructuralEpsilon = 1e-6;

/// 1 / (JS + eps). Identical texts give 1/eps.
double structural_similarity(std::string_view a, std::string_view b);

// ---------------------------------------------------------------------------
// Normalized output score

struct EvalConfig {
  int samples = 3;      // m, outputs per input
  int test_inputs = 2;  // n
};

using BaseMetric = std::function<double(const std::string& candidate, const std::string& reference)>;

/// Outputs indexed [input][sample].
using OutputGrid = std::vector<std::vector<std::string>>;

struct Score {
  double value = 0.0;  // clamped to (0,1]
  double raw = 0.0;
};

/// Lower clamp for Score values; the normalized score is kept strictly positive.
inline constexpr double kScoreFloor = 1e-9;

/// Mean over inputs of (mean surrogate-vs-target metric) over (mean
/// distinct target-pair metric). Throws PreconditionError for m < 2 or
/// mismatched grids, DegenerateTargetsError when a denominator is 0.
Score output_score(const OutputGrid& surrogate, const OutputGrid& target, const BaseMetric& metric);

SimilarityTriple similarity_triple(const OutputGrid& surrogate, const OutputGrid& target,
                                   const SyntaxProvider& syntax);

// ---------------------------------------------------------------------------
// Attack success

bool attack_success(const SimilarityTriple& triple, const Thresholds& thresholds);

/// Fraction of successful triples. Throws PreconditionError on empty input.
double asr(std::span<const SimilarityTriple> triples, const Thresholds& thresholds);
double asr(std::span<const AttackResult> results);

// ---------------------------------------------------------------------------
// Threshold calibration

struct LabeledTriple {
  SimilarityTriple triple;
  int label = 0;  // 1 = human-judged successful
};

struct Calibration {
  Thresholds thresholds;
  double accuracy = 0.0;
};

inline constexpr double kDefaultGridStep = 0.05;

/// Exhaustive grid search for the thresholds whose success rule best
/// predicts the labels. Ties prefer higher semantic, then syntactic, then
/// structural thresholds.
Calibration calibrate_thresholds(std::span<const LabeledTriple> labeled,
                                 double grid_step = kDefaultGridStep);

void to_json(json& j, const LabeledTriple& t);
void from_json(const json& j, LabeledTriple& t);

}  // namespace prsa
