#include <cmath>
#include <random>

#include "prsa/harness.hpp"
#include "prsa/text.hpp"

namespace prsa {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Fisher-Yates over an explicit engine so the order is the same on every
// standard library.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace

std::string obfuscate_output(std::string_view y, double ratio, std::uint64_t seed) {
  const auto spans = text::whitespace_spans(y);
  const double r = std::clamp(ratio, 0.0, 1.0);
  const auto count = static_cast<std::size_t>(std::floor(r * static_cast<double>(spans.size()) + 1e-9));
  if (count == 0) return std::string(y);

  std::vector<bool> masked(spans.size(), false);
  const auto order = shuffled_indices(spans.size(), seed);
  for (std::size_t i = 0; i < count; ++i) masked[order[i]] = true;

  std::string out;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    out.append(y.substr(cursor, spans[i].begin - cursor));
    if (masked[i]) {
      out.append(kMaskGlyph);
    } else {
      out.append(y.substr(spans[i].begin, spans[i].end - spans[i].begin));
    }
    cursor = spans[i].end;
  }
  out.append(y.substr(cursor));
  return out;
}

std::vector<DefensePoint> defense_sweep(const Dataset& dataset, std::span<const double> ratios,
                                        const AttackConfig& config, const Services& services, std::uint64_t seed,
                                        int jobs) {
  if (dataset.empty()) throw PreconditionError("defense sweep: empty dataset");
  AttackConfig quiet = config;
  quiet.report_path.clear();
  std::vector<DefensePoint> out;
  for (double ratio : ratios) {
    std::vector<PromptRecord> records = dataset.records();
    for (std::size_t i = 0; i < records.size(); ++i) {
      for (std::size_t j = 0; j < records[i].examples.size(); ++j) {
        auto& ex = records[i].examples[j];
        ex.output = obfuscate_output(ex.output, ratio, splitmix(seed ^ splitmix(i * 1'000'003ull + j)));
      }
    }
    const CampaignReport report = run_campaign(Dataset(std::move(records)), quiet, services, jobs);
    out.push_back({ratio, report.mean, report.asr, report.results.size()});
  }
  return out;
}

}  // namespace prsa
