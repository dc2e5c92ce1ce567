// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "prsa/mock_llm.hpp"
#include "prsa/mock_suite.hpp"
#include "prsa/text.hpp"

using namespace prsa;

namespace {

using Rng = std::mt19937_64;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string random_sentence(Rng& rng, int lo, int hi) {
  static const char* words[] = {"the", "cat", "dog", "sat", "on", "mat", "a", "red", "ball", "ran", "to", "house"};
  std::uniform_int_distribution<int> len(lo, hi), pick(0, 11);
  std::string s;
  for (int i = len(rng); i > 0; --i) s += std::string(s.empty() ? "" : " ") + words[pick(rng)];
  return s;
}

// 1. Metric oracles
Outcome metric_oracles() {
  Outcome o;
  const std::string s = "the cat sat on the mat";
  o.require(std::abs(bleu(s, s) - 1.0) <= 1e-9, "bleu(identity) != 1");
  const std::string ref = "the cat is on the mat";
  const double golden = oracle::oracle_bleu(s, {ref});
  o.require(std::abs(bleu(s, ref) - golden) <= 1e-9, fmt("bleu golden %.12f vs oracle %.12f", bleu(s, ref), golden));
  o.require(std::abs(golden - std::pow(1.0 / 18.0, 0.25)) <= 1e-12, "oracle disagrees with the hand count");
  o.require(std::abs(js_divergence("a b c a", "c a b a")) <= 1e-12, "JS(identical) != 0");
  o.require(std::abs(js_divergence("a b c", "d e f") - 1.0) <= 1e-12, "JS(disjoint) != 1");

  Rng rng(101);
  const BaseMetric metric = [](const std::string& c, const std::string& r) { return bleu(c, r); };
  std::uniform_int_distribution<int> n_dist(1, 3), m_dist(2, 4);
  for (int g = 0; g < 100; ++g) {
    const int n = n_dist(rng), m = m_dist(rng);
    OutputGrid sg(n), tg(n);
    for (int i = 0; i < n; ++i) {
      const std::string base = random_sentence(rng, 4, 8);
      for (int j = 0; j < m; ++j) {
        sg[i].push_back(random_sentence(rng, 2, 9));
        tg[i].push_back(base + " " + random_sentence(rng, 0, 3));
      }
    }
    const double lib = output_score(sg, tg, metric).raw;
    const double ref_v = oracle::naive_score(sg, tg, metric);
    o.require(std::abs(lib - ref_v) <= 1e-9, fmt("score grid mismatch %.12f vs %.12f", lib, ref_v));
  }
  return o;
}

// 2. Beam search equals the exhaustive prefix argmax
Outcome beam_equivalence() {
  Outcome o;
  Rng rng(202);
  std::uniform_int_distribution<int> size(1, 8), value(0, 9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(size(rng));
    CandidateList c;
    for (std::size_t i = 0; i < n; ++i) c.push_back({"w" + std::to_string(i), 1.0 - 0.1 * double(i), {i}});
    std::vector<double> table(n + 1);
    for (auto& v : table) v = value(rng) / 9.0;
    const BeamEvaluator eval = [&](const std::vector<std::string>& p) { return table[p.size()]; };
    std::size_t best = 1;
    for (std::size_t k = 2; k <= n; ++k) {
      if (table[k] > table[best]) best = k;
    }
    const auto chosen = select_mask_words(c, eval, 1.0, static_cast<int>(n), static_cast<int>(n) + trial % 3);
    std::vector<std::string> expected(n == 0 ? 0 : best);
    for (std::size_t k = 0; k < best; ++k) expected[k] = c[k].word;
    o.require(chosen == expected, "instance " + std::to_string(trial) + " differs from exhaustive argmax");
  }
  return o;
}

// 3. Calibration recovers planted thresholds
Outcome calibration_recovery() {
  Outcome o;
  const Thresholds planted{0.5, 0.7, 0.85};
  const double t[3] = {planted.semantic, planted.syntactic, planted.structural};
  Rng rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0), near(0.0, 0.049);
  std::vector<LabeledTriple> data;
  auto above = [&](int axis) { return t[axis] + u(rng) * (1.0 - t[axis]); };
  for (int i = 0; i < 500; ++i) {
    double v[3];
    switch (i % 3) {
      case 0:  // uniform, labeled by the rule
        for (double& x : v) x = u(rng);
        break;
      case 1: {  // positive just above one threshold
        const int axis = (i / 3) % 3;
        for (int a = 0; a < 3; ++a) v[a] = a == axis ? t[a] + near(rng) : above(a);
        break;
      }
      default: {  // negative just below one threshold
        const int axis = (i / 3) % 3;
        for (int a = 0; a < 3; ++a) v[a] = a == axis ? t[a] - 0.001 - near(rng) : above(a);
        break;
      }
    }
    const SimilarityTriple triple{v[0], v[1], v[2], v[0], v[1], v[2], false};
    data.push_back({triple, attack_success(triple, planted) ? 1 : 0});
  }
  const Calibration c = calibrate_thresholds(data);
  o.require(kDefaultGridStep == 0.05, "default grid step is not 0.05");
  o.require(c.accuracy == 1.0, fmt("accuracy %.4f", c.accuracy));
  const double got[3] = {c.thresholds.semantic, c.thresholds.syntactic, c.thresholds.structural};
  for (int a = 0; a < 3; ++a) {
    o.require(std::abs(got[a] - t[a]) <= 0.05 + 1e-9, fmt("axis recovered %.3f, planted %.3f", got[a], t[a]));
  }
  return o;
}

struct MockRun {
  MockSuite suite = build_mock_suite(7);
  Services services;

  MockRun() {
    services = mock_services(suite);
    services.attention = map_attention(learn_all(suite.mutation, services, MutationConfig{}));
  }
};

// 4. Closed-loop mock pipeline
Outcome closed_loop(const MockRun& run) {
  Outcome o;
  auto asr_for = [&](Ablation a) {
    AttackConfig c;
    c.ablation = a;
    const CampaignReport r = run_campaign(run.suite.attack, c, run.services);
    return std::pair{r.asr, r.failures.size()};
  };
  const auto [full, full_failures] = asr_for(Ablation::full);
  o.require(run.suite.attack.size() == 20, "suite does not have 20 records");
  o.require(run.suite.attack.categories().size() >= 4, "fewer than 4 categories");
  o.require(full_failures == 0, "records failed under the full attack");
  o.require(full >= 0.6, fmt("ASR(full) = %.3f < 0.6", full));
  for (auto [a, name] : {std::pair{Ablation::no_mutation, "no_mutation"}, std::pair{Ablation::no_pruning, "no_pruning"},
                         std::pair{Ablation::naive, "naive"}}) {
    const double v = asr_for(a).first;
    o.require(full > v, fmt("ASR(full) %.3f not above ", full) + name + fmt(" %.3f", v));
  }
  if (o.ok) o.detail = fmt("ASR(full) = %.2f", full);
  return o;
}

// 5. Pruning generalization
Outcome pruning_generalization(const MockRun& run) {
  Outcome o;
  const BaseMetric metric = [](const std::string& c, const std::string& r) { return bleu(c, r); };
  Backend& target = *run.services.target;
  const int m = 3;
  auto semantic_on = [&](const std::string& surrogate, const std::string& hidden, const std::string& x) {
    OutputGrid s(1), t(1);
    for (int j = 0; j < m; ++j) {
      s[0].push_back(complete(target, surrogate, x));
      t[0].push_back(complete(target, hidden, x));
    }
    return output_score(s, t, metric).value;
  };
  std::size_t leaking = 0;
  double improvement = 0.0;
  for (const auto& r : run.suite.attack.records()) {
    if (r.examples.size() < 2 || !r.prompt_text) continue;
    const IOPair& first = r.examples[0];
    const std::string naive = generate_surrogate(*run.services.generator, first.input, first.output, nullptr);
    const auto nouns = extract_nouns(first.input);
    const auto words = text::word_tokens(text::to_lower(naive));
    const bool leaks = std::any_of(nouns.begin(), nouns.end(), [&](const std::string& n) {
      return std::find(words.begin(), words.end(), n) != words.end();
    });
    if (!leaks) continue;
    ++leaking;
    const std::span<const IOPair> used(r.examples.data(), 1);
    const PruneOutcome pruned = prune_surrogate(naive, used, target, *run.services.embeddings, PruneConfig{});
    const std::string& held_out = r.examples[1].input;
    const double before = semantic_on(naive, *r.prompt_text, held_out);
    const double after = semantic_on(pruned.prompt.text, *r.prompt_text, held_out);
    o.require(after >= before, r.id + fmt(": after %.4f < before %.4f", after, before));
    improvement += after - before;
  }
  o.require(leaking > 0, "no record's naive surrogate leaks an input noun");
  const double mean = leaking ? improvement / double(leaking) : 0.0;
  o.require(mean > 0.0, fmt("mean improvement %.4f", mean));
  if (o.ok) o.detail = std::to_string(leaking) + fmt(" leaking records, mean improvement %.3f", mean);
  return o;
}

// 6. Obfuscation defense
Outcome defense(const MockRun& run) {
  Outcome o;
  const std::vector<double> ratios{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  const auto points = defense_sweep(run.suite.attack, ratios, AttackConfig{}, run.services, 2024);
  for (std::size_t i = 1; i < points.size(); ++i) {
    o.require(points[i].mean.semantic <= points[i - 1].mean.semantic,
              fmt("semantic rises at ratio %.1f (%.4f)", points[i].ratio, points[i].mean.semantic));
  }
  const double drop = 1.0 - points.back().mean.semantic / points.front().mean.semantic;
  o.require(drop >= 0.10, fmt("relative drop %.3f < 0.10", drop));
  if (o.ok) o.detail = fmt("relative drop %.2f", drop);
  return o;
}

// 7. Attention algebra
Outcome attention_algebra() {
  Outcome o;
  Rng rng(707);
  static const char* names[] = {"tone", "style", "structure", "audience", "theme"};
  static const char* descs[] = {"", "x", "y", "short", "longer text"};
  std::uniform_int_distribution<int> coin(0, 1), pick(0, 4), loss(0, 10), count(1, 4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DifferenceReport> reports(static_cast<std::size_t>(count(rng)));
    for (auto& r : reports) {
      for (int f = 0; f < 5; ++f) {
        if (coin(rng)) r.factors.push_back({names[f], descs[pick(rng)], loss(rng) / 10.0, false});
      }
    }
    const double tau = loss(rng) / 20.0;
    std::vector<std::size_t> order(reports.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Attention first;
    bool have = false;
    do {
      Attention a;
      for (std::size_t i : order) a = update_attention(a, reports[i], tau);
      if (!have) {
        first = a;
        have = true;
      } else {
        o.require(a == first, "fold depends on report order");
      }
    } while (std::next_permutation(order.begin(), order.end()));
  }
  MutationConfig zero;
  zero.iterations = 0;
  BackendConfig cfg;
  cfg.mock_seed = 7;
  MockBackend mock(cfg);
  PromptRecord r;
  r.id = "r";
  r.category = Category("food");
  r.examples = {{"soup", complete(mock, mock::compose_prompt(Task::recipe, {Feature::emoji}, "{}"), "soup")}};
  const std::vector<PromptRecord> records{r};
  const Attention empty = learn_attention(records, mock, mock, mock, zero);
  o.require(empty.empty(), "N = 0 produced factors");
  return o;
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  int failures = 0;
  auto report = [&](int id, const char* name, double limit_s, const std::function<Outcome()>& fn) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (o.ok && secs >= limit_s) {
      o.ok = false;
      o.detail = fmt("took %.2f s, limit %.0f s", secs, limit_s);
    }
    failures += o.ok ? 0 : 1;
    std::printf("%s  %d %-24s %7.3f s  %s\n", o.ok ? "PASS" : "FAIL", id, name, secs, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "metric-oracles", 5, metric_oracles);
  report(2, "beam-equivalence", 1, beam_equivalence);
  report(3, "calibration-recovery", 30, calibration_recovery);
  // Each mock criterion builds the suite and learns attention inside its own timing.
  report(4, "closed-loop-mock", 120, [] { return closed_loop(MockRun{}); });
  report(5, "pruning-generalization", 60, [] { return pruning_generalization(MockRun{}); });
  report(6, "defense-direction", 120, [] { return defense(MockRun{}); });
  report(7, "attention-algebra", 1, attention_algebra);
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
