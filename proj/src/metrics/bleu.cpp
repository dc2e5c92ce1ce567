#include <cmath>
#include <limits>
#include <map>

#include "prsa/error.hpp"
#include "prsa/metrics.hpp"
#include "prsa/text.hpp"

namespace prsa {

namespace {

constexpr int kMaxOrder = 4;

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

}  // namespace

double bleu_tokens(const std::vector<std::string>& candidate,
                   const std::vector<std::vector<std::string>>& references) {
  if (references.empty()) throw PreconditionError("bleu: empty reference list");
  if (candidate.empty()) return 0.0;

  double log_sum = 0.0;
  for (int n = 1; n <= kMaxOrder; ++n) {
    const NgramCounts cand = count_ngrams(candidate, n);
    NgramCounts max_ref;
    for (const auto& ref : references) {
      for (const auto& [gram, c] : count_ngrams(ref, n)) {
        auto& slot = max_ref[gram];
        slot = std::max(slot, c);
      }
    }
    int matched = 0;
    int total = 0;
    for (const auto& [gram, c] : cand) {
      total += c;
      if (auto it = max_ref.find(gram); it != max_ref.end()) matched += std::min(c, it->second);
    }
    double precision;
    if (n == 1) {
      if (matched == 0) return 0.0;
      precision = static_cast<double>(matched) / total;
    } else {
      precision = (matched + 1.0) / (total + 1.0);
    }
    log_sum += std::log(precision) / kMaxOrder;
  }

  // Closest reference length; ties go to the shorter one.
  const auto c = static_cast<long>(candidate.size());
  long r = std::numeric_limits<long>::max();
  for (const auto& ref : references) {
    const auto len = static_cast<long>(ref.size());
    if (std::abs(len - c) < std::abs(r - c) || (std::abs(len - c) == std::abs(r - c) && len < r)) {
      r = len;
    }
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / c);
  return bp * std::exp(log_sum);
}

double bleu(std::string_view candidate, std::span<const std::string> references) {
  if (references.empty()) throw PreconditionError("bleu: empty reference list");
  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(text::tokenize(r));
  return bleu_tokens(text::tokenize(candidate), refs);
}

double bleu(std::string_view candidate, std::string_view reference) {
  return bleu_tokens(text::tokenize(candidate), {text::tokenize(reference)});
}

}  // namespace prsa
