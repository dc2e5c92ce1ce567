#include <cmath>
#include <map>
#include <set>

#include "prsa/error.hpp"
#include "prsa/metrics.hpp"
#include "prsa/text.hpp"

namespace prsa {

namespace {

std::map<std::string, double> unigram_counts(std::string_view s) {
  std::map<std::string, double> counts;
  for (const auto& t : text::tokenize(s)) counts[text::to_lower(t)] += 1.0;
  return counts;
}

double total(const std::map<std::string, double>& m) {
  double t = 0.0;
  for (const auto& [_, c] : m) t += c;
  return t;
}

}  // namespace

double js_divergence_counts(const std::map<std::string, double>& p,
                            const std::map<std::string, double>& q) {
  const double tp = total(p);
  const double tq = total(q);
  if (tp <= 0.0 && tq <= 0.0) throw PreconditionError("js divergence: both distributions empty");
  if (tp <= 0.0 || tq <= 0.0) return 1.0;

  std::set<std::string> vocab;
  for (const auto& [w, _] : p) vocab.insert(w);
  for (const auto& [w, _] : q) vocab.insert(w);

  double kl_p = 0.0;
  double kl_q = 0.0;
  for (const auto& w : vocab) {
    const auto ip = p.find(w);
    const auto iq = q.find(w);
    const double pw = ip == p.end() ? 0.0 : ip->second / tp;
    const double qw = iq == q.end() ? 0.0 : iq->second / tq;
    const double mw = 0.5 * (pw + qw);
    if (pw > 0.0) kl_p += pw * std::log2(pw / mw);
    if (qw > 0.0) kl_q += qw * std::log2(qw / mw);
  }
  const double js = 0.5 * kl_p + 0.5 * kl_q;
  // Rounding can push the sum a hair outside [0,1].
  return std::clamp(js, 0.0, 1.0);
}

double js_divergence(std::string_view a, std::string_view b) {
  return js_divergence_counts(unigram_counts(a), unigram_counts(b));
}

double structural_similarity(std::string_view a, std::string_view b) {
  return 1.0 / (js_divergence(a, b) + kStructuralEpsilon);
}

}  // namespace prsa
