// prsa: command-line front end for the prompt-stealing toolkit.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "prsa/config.hpp"
#include "prsa/mock_suite.hpp"
#include "prsa/text.hpp"

using namespace prsa;

namespace {

struct Common {
  std::string config;
  std::string mock_suite;  // directory, or "builtin"
  std::string dataset;
  std::string mutation_set;
  std::string store;
  std::string report;
  std::string ablation;
  std::string manual_factors;
  std::string mode;
  int jobs = 0;
  int samples = 0;
  int test_inputs = 0;
  int examples = 0;
  int iterations = -1;
  double tau = -1;
  int cap = 0;
  double gamma = -2, alpha = -1;
  int beam = 0, freq = 0;
  std::vector<double> thresholds;
  std::uint64_t seed = 7;
  bool learn_missing = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON run configuration");
  cmd->add_option("--mock-suite", c.mock_suite, "mock suite directory, or 'builtin'");
  cmd->add_option("--dataset", c.dataset, "JSONL records to attack");
  cmd->add_option("--mutation-set", c.mutation_set, "JSONL records used to learn attention");
  cmd->add_option("--store", c.store, "attention store directory");
  cmd->add_option("--report", c.report, "report path (JSON; a .txt summary is written beside it)");
  cmd->add_option("--ablation", c.ablation, "full | no_mutation | no_pruning | manual_attention | naive");
  cmd->add_option("--manual-factors", c.manual_factors, "factor file for manual_attention");
  cmd->add_option("--jobs", c.jobs, "parallel records");
  cmd->add_option("-m,--samples", c.samples, "outputs per evaluation input");
  cmd->add_option("-n,--test-inputs", c.test_inputs, "evaluation inputs per record");
  cmd->add_option("-k,--examples", c.examples, "example pairs shown to the generator");
  cmd->add_option("--iterations", c.iterations, "mutation iterations per record");
  cmd->add_option("--tau", c.tau, "retention threshold");
  cmd->add_option("--cap", c.cap, "records per category used for mutation");
  cmd->add_option("--mode", c.mode, "per_record | global");
  cmd->add_option("--gamma", c.gamma, "related-word similarity threshold");
  cmd->add_option("--alpha", c.alpha, "truncation factor");
  cmd->add_option("--beam", c.beam, "beam size");
  cmd->add_option("--freq", c.freq, "evaluation frequency");
  cmd->add_option("--thresholds", c.thresholds, "semantic syntactic structural")->expected(3);
  cmd->add_option("--seed", c.seed, "mock seed");
  cmd->add_flag("--learn-missing", c.learn_missing, "learn attention for categories missing from the store");
}

// A fully wired run: services, attack configuration and default dataset.
struct Run {
  RunConfig config;
  Services services;
  Dataset dataset;
  Dataset mutation_set;
  std::optional<MockSuite> suite;
  std::shared_ptr<AttentionStore> store;
};

Run assemble(const Common& c) {
  Run run;
  if (!c.config.empty()) run.config = load_run_config(c.config);
  AttackConfig& a = run.config.attack;
  if (!c.ablation.empty()) a.ablation = parse_ablation(c.ablation);
  if (!c.manual_factors.empty()) a.manual_factors = c.manual_factors;
  if (!c.report.empty()) a.report_path = c.report;
  if (c.samples > 0) a.eval.samples = c.samples;
  if (c.test_inputs > 0) a.eval.test_inputs = c.test_inputs;
  if (c.examples > 0) a.generation_examples = static_cast<std::size_t>(c.examples);
  if (c.iterations >= 0) a.mutation.iterations = c.iterations;
  if (c.tau >= 0) a.mutation.retention = c.tau;
  if (c.cap > 0) a.mutation.sample_cap = static_cast<std::size_t>(c.cap);
  if (!c.mode.empty()) {
    if (c.mode != "global" && c.mode != "per_record") throw ConfigError("unknown mode '" + c.mode + "'");
    a.mutation.mode = c.mode == "global" ? LoopMode::global : LoopMode::per_record;
  }
  if (c.gamma > -2) a.prune.similarity_threshold = c.gamma;
  if (c.alpha > 0) a.prune.truncation = c.alpha;
  if (c.beam > 0) a.prune.beam_size = c.beam;
  if (c.freq > 0) a.prune.eval_frequency = c.freq;
  if (c.thresholds.size() == 3) a.thresholds = {c.thresholds[0], c.thresholds[1], c.thresholds[2]};
  if (c.jobs > 0) run.config.jobs = c.jobs;
  if (!c.store.empty()) run.config.store_dir = c.store;

  if (!c.mock_suite.empty()) {
    run.suite = c.mock_suite == "builtin" ? build_mock_suite(c.seed) : load_mock_suite(c.mock_suite);
    run.services = mock_services(*run.suite);
    run.dataset = run.suite->attack;
    run.mutation_set = run.suite->mutation;
    if (a.ablation == Ablation::manual_attention) {
      run.services.manual_attention = load_manual_attention(a.manual_factors, Category("manual"));
    }
  } else {
    if (c.config.empty()) throw ConfigError("either --config or --mock-suite is required");
    run.services = make_services(run.config);
  }
  if (!c.dataset.empty()) run.dataset = load_dataset(c.dataset);
  if (!c.mutation_set.empty()) run.mutation_set = load_dataset(c.mutation_set);
  return run;
}

// Attention: the store when one is configured, otherwise learned in memory
// from the mutation set.
void attach_attention(Run& run, const Common& c) {
  const std::string tag = run.services.target->config().model_tag;
  const bool have_store = !c.store.empty() || (!run.suite && !run.config.store_dir.empty());
  if (have_store) {
    run.store = std::make_shared<AttentionStore>(run.config.store_dir);
    if (c.learn_missing && !run.mutation_set.empty()) {
      std::vector<PromptRecord> missing;
      for (const auto& cat : run.dataset.categories()) {
        try {
          run.store->get(cat, tag);
        } catch (const AttentionMissingError&) {
          for (auto& r : run.mutation_set.in_category(cat)) missing.push_back(std::move(r));
        }
      }
      if (!missing.empty()) {
        for (auto& [cat, att] : learn_all(Dataset(std::move(missing)), run.services, run.config.attack.mutation)) {
          run.store->put(att);
        }
      }
    }
    run.services.attention = store_attention(run.store, tag);
    return;
  }
  if (!run.mutation_set.empty()) {
    std::vector<std::string> errors;
    auto learned = learn_all(run.mutation_set, run.services, run.config.attack.mutation, &errors);
    for (const auto& e : errors) std::cerr << "mutation: " << e << "\n";
    run.services.attention = map_attention(std::move(learned));
  }
}

int cmd_mutate(const Common& c) {
  Run run = assemble(c);
  const Dataset& source = run.mutation_set.empty() ? run.dataset : run.mutation_set;
  if (source.empty()) throw ConfigError("mutate: no records (use --dataset or --mutation-set)");
  AttentionStore store(run.config.store_dir);
  std::vector<std::string> errors;
  const auto learned = learn_all(source, run.services, run.config.attack.mutation, &errors);
  for (const auto& e : errors) std::cerr << "mutation: " << e << "\n";
  for (const auto& [cat, att] : learned) {
    const int version = store.put(att);
    std::cout << cat.name() << " (v" << version << ", " << att.samples_used << " samples)\n";
    for (const auto& [name, f] : att.factors) std::printf("  %-28s %.2f  %s\n", name.c_str(), f.loss, f.description.c_str());
  }
  return learned.empty() ? 1 : 0;
}

int cmd_attack(const Common& c, const std::string& record_id) {
  Run run = assemble(c);
  attach_attention(run, c);
  const PromptRecord* record = run.dataset.find(record_id);
  if (!record) throw ConfigError("no record with id '" + record_id + "'");
  try {
    const AttackResult result = run_attack(*record, run.config.attack, run.services);
    const std::string out = json(result).dump(2);
    if (!run.config.attack.report_path.empty()) write_file_atomic(run.config.attack.report_path, out + "\n");
    std::cout << out << "\n";
    return 0;
  } catch (const AttackError& e) {
    std::cerr << "attack failed in " << e.stage() << ": " << e.what() << "\n";
    std::cout << json(e.partial()).dump(2) << "\n";
    return 1;
  }
}

int cmd_campaign(const Common& c) {
  Run run = assemble(c);
  attach_attention(run, c);
  const CampaignReport report = run_campaign(run.dataset, run.config.attack, run.services, run.config.jobs);
  std::cout << summary_table(report);
  for (const auto& f : report.failures) std::cerr << f.record_id << " [" << f.stage << "] " << f.message << "\n";
  return report.transport_failure_majority() ? 2 : 0;
}

int cmd_calibrate(const std::string& path, double step) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::vector<LabeledTriple> labeled;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      labeled.push_back(json::parse(line).get<LabeledTriple>());
    } catch (const json::exception& e) {
      throw DatasetError(n, e.what());
    }
  }
  const Calibration cal = calibrate_thresholds(labeled, step);
  std::cout << json{{"thresholds", cal.thresholds}, {"accuracy", cal.accuracy}, {"samples", labeled.size()}}.dump(2)
            << "\n";
  return 0;
}

int cmd_defend(const Common& c, std::vector<double> ratios) {
  Run run = assemble(c);
  attach_attention(run, c);
  if (ratios.empty()) ratios = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  const auto points = defense_sweep(run.dataset, ratios, run.config.attack, run.services, c.seed, run.config.jobs);
  std::printf("%6s %9s %9s %11s %6s\n", "ratio", "semantic", "syntactic", "structural", "ASR");
  json out = json::array();
  for (const auto& p : points) {
    std::printf("%6.2f %9.3f %9.3f %11.3f %6.2f\n", p.ratio, p.mean.semantic, p.mean.syntactic, p.mean.structural,
                p.asr);
    out.push_back({{"ratio", p.ratio}, {"mean", p.mean}, {"asr", p.asr}, {"evaluated", p.evaluated}});
  }
  if (!run.config.attack.report_path.empty()) write_file_atomic(run.config.attack.report_path, out.dump(2) + "\n");
  return 0;
}

int cmd_inject(const Common& c, const std::string& probes_path, std::string hidden, const std::string& record_id,
               const std::string& protect) {
  Run run = assemble(c);
  if (hidden.empty() && !record_id.empty()) {
    const PromptRecord* r = run.dataset.find(record_id);
    if (!r || !r->prompt_text) throw ConfigError("record '" + record_id + "' has no ground-truth prompt");
    hidden = *r->prompt_text;
  }
  if (hidden.empty()) hidden = run.services.target->config().hidden_prompt;
  if (hidden.empty()) throw ConfigError("inject: no hidden prompt (use --hidden-prompt or --record)");
  BackendConfig service = run.services.target->config();
  service.hidden_prompt = protect.empty() ? hidden : protect + " " + hidden;
  auto backend = make_backend(service);
  const auto probes = load_probes(probes_path);
  const InjectionReport report = injection_baseline(*backend, hidden, probes);
  for (const auto& p : report.probes) {
    std::cout << (p.success ? "LEAK  " : "SAFE  ") << text::collapse_whitespace(p.probe) << "\n";
  }
  std::cout << "success rate " << report.success_rate << "\n";
  if (!run.config.attack.report_path.empty()) {
    write_file_atomic(run.config.attack.report_path, json(report).dump(2) + "\n");
  }
  return 0;
}

int cmd_mock(const Common& c, const std::string& out_dir) {
  const MockSuite suite = build_mock_suite(c.seed);
  if (!out_dir.empty()) {
    write_mock_suite(suite, out_dir);
    std::cout << "wrote " << suite.mutation.size() << " mutation and " << suite.attack.size() << " attack records to "
              << out_dir << "\n";
    return 0;
  }
  for (const auto& r : suite.attack.records()) {
    std::cout << r.id << (suite.unrecoverable.contains(r.id) ? "  (unrecoverable)" : "") << "\n  prompt: "
              << r.prompt_text.value_or("") << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prompt-stealing attack toolkit"};
  app.require_subcommand(1);

  Common common;
  auto* mutate = app.add_subcommand("mutate", "learn per-category attention and store it");
  add_common(mutate, common);

  std::string record_id;
  auto* attack = app.add_subcommand("attack", "attack a single record");
  add_common(attack, common);
  attack->add_option("--record", record_id, "record id")->required();

  auto* campaign = app.add_subcommand("campaign", "attack every record of a dataset");
  add_common(campaign, common);

  std::string labeled;
  double step = kDefaultGridStep;
  auto* calibrate = app.add_subcommand("calibrate", "fit success thresholds to labeled triples");
  calibrate->add_option("--labeled", labeled, "JSONL of {semantic, syntactic, structural, label}")->required();
  calibrate->add_option("--step", step, "grid step");

  std::vector<double> ratios;
  auto* defend = app.add_subcommand("defend", "output obfuscation sweep");
  add_common(defend, common);
  defend->add_option("--ratios", ratios, "obfuscation ratios")->delimiter(',');

  std::string probes = std::string(PRSA_DATA_DIR) + "/probes.txt";
  std::string hidden, protect;
  auto* inject = app.add_subcommand("inject", "prompt-injection baseline");
  add_common(inject, common);
  inject->add_option("--probes", probes, "probe file");
  inject->add_option("--hidden-prompt", hidden, "service instructions");
  inject->add_option("--record", record_id, "take the hidden prompt from this record");
  inject->add_option("--protect", protect, "protective instruction prepended to the hidden prompt");

  std::string out_dir;
  auto* mock = app.add_subcommand("mock", "generate or list the synthetic mock suite");
  mock->add_option("--out", out_dir, "write the suite to this directory");
  mock->add_option("--seed", common.seed, "mock seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mutate) return cmd_mutate(common);
    if (*attack) return cmd_attack(common, record_id);
    if (*campaign) return cmd_campaign(common);
    if (*calibrate) return cmd_calibrate(labeled, step);
    if (*defend) return cmd_defend(common, ratios);
    if (*inject) return cmd_inject(common, probes, hidden, record_id, protect);
    if (*mock) return cmd_mock(common, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
