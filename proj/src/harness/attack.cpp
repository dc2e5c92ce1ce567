#include <chrono>
#include <future>

#include "prsa/harness.hpp"
#include "prsa/text.hpp"

namespace prsa {

namespace {

constexpr std::pair<Ablation, std::string_view> kAblations[] = {
    {Ablation::full, "full"},
    {Ablation::no_mutation, "no_mutation"},
    {Ablation::no_pruning, "no_pruning"},
    {Ablation::manual_attention, "manual_attention"},
    {Ablation::naive, "naive"},
};

bool uses_learned_attention(Ablation a) { return a == Ablation::full || a == Ablation::no_pruning; }
bool uses_pruning(Ablation a) { return a != Ablation::no_pruning && a != Ablation::naive; }

using Clock = std::chrono::steady_clock;

}  // namespace

std::string_view ablation_name(Ablation a) {
  for (const auto& [v, n] : kAblations) {
    if (v == a) return n;
  }
  return "full";
}

Ablation parse_ablation(std::string_view name) {
  for (const auto& [v, n] : kAblations) {
    if (n == name) return v;
  }
  throw ConfigError("unknown ablation '" + std::string(name) + "'");
}

void AttackConfig::validate() const {
  if (eval.samples < 2) throw ConfigError("eval: at least 2 samples per input are needed");
  if (eval.test_inputs < 1) throw ConfigError("eval: at least 1 test input is needed");
  if (generation_examples < 1) throw ConfigError("attack: generation_examples must be positive");
  if (ablation == Ablation::manual_attention && manual_factors.empty()) {
    throw ConfigError("manual_attention needs a factor file");
  }
  prune.validate();
  mutation.validate();
}

void to_json(json& j, const AttackConfig& c) {
  j = json{{"ablation", ablation_name(c.ablation)},
           {"eval", {{"samples", c.eval.samples}, {"test_inputs", c.eval.test_inputs}}},
           {"prune", c.prune},
           {"mutation", c.mutation},
           {"thresholds", c.thresholds},
           {"generation_examples", c.generation_examples}};
  if (!c.manual_factors.empty()) j["manual_factors"] = c.manual_factors.string();
  if (!c.report_path.empty()) j["report_path"] = c.report_path.string();
}

void from_json(const json& j, AttackConfig& c) {
  if (j.contains("ablation")) c.ablation = parse_ablation(j.at("ablation").get<std::string>());
  if (auto e = j.find("eval"); e != j.end()) {
    c.eval.samples = e->value("samples", c.eval.samples);
    c.eval.test_inputs = e->value("test_inputs", c.eval.test_inputs);
  }
  if (j.contains("prune")) j.at("prune").get_to(c.prune);
  if (j.contains("mutation")) j.at("mutation").get_to(c.mutation);
  if (j.contains("thresholds")) j.at("thresholds").get_to(c.thresholds);
  c.generation_examples = j.value("generation_examples", c.generation_examples);
  if (j.contains("manual_factors")) c.manual_factors = j.at("manual_factors").get<std::string>();
  if (j.contains("report_path")) c.report_path = j.at("report_path").get<std::string>();
}

AttentionSource store_attention(std::shared_ptr<AttentionStore> store, std::string model_tag) {
  return [store = std::move(store), model_tag = std::move(model_tag)](const Category& c) {
    return store->get(c, model_tag);
  };
}

AttentionSource map_attention(std::map<Category, Attention> attention) {
  return [attention = std::move(attention)](const Category& c) {
    auto it = attention.find(c);
    if (it == attention.end()) throw AttentionMissingError("attention missing for category '" + c.name() + "'");
    return it->second;
  };
}

AttackError::AttackError(std::string stage, const std::string& what, bool transport, AttackResult partial)
    : Error(stage + ": " + what), stage_(std::move(stage)), transport_(transport), partial_(std::move(partial)) {}

std::vector<std::string> evaluation_inputs(const PromptRecord& record, std::size_t generation_examples,
                                           std::size_t n, std::span<const std::string> extra) {
  std::vector<std::string> out;
  auto add = [&](const std::string& x) {
    if (out.size() < n && std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  };
  if (!record.examples.empty()) add(record.examples.front().input);
  for (std::size_t i = generation_examples; i < record.examples.size(); ++i) add(record.examples[i].input);
  for (const auto& x : extra) add(x);
  return out;
}

AttackResult run_attack(const PromptRecord& record, const AttackConfig& config, const Services& services) {
  config.validate();
  if (!services.target || !services.generator) throw ConfigError("attack: target and generator backends are required");
  if (record.examples.empty()) throw PreconditionError("attack: record " + record.id + " has no examples");

  AttackResult result;
  result.record_id = record.id;
  result.category = record.category;
  result.backend_tags = {{"target", services.target->config().model_tag},
                         {"generator", services.generator->config().model_tag}};
  result.surrogate.source_record_id = record.id;

  CountingBackend target(services.target);
  CountingBackend generator(services.generator);

  std::string stage;
  Clock::time_point started;
  std::size_t calls_before = 0;
  auto begin_stage = [&](std::string name) {
    stage = std::move(name);
    started = Clock::now();
    calls_before = target.calls() + generator.calls();
  };
  auto end_stage = [&] {
    StageCost& cost = result.stages[stage];
    cost.calls = target.calls() + generator.calls() - calls_before;
    cost.millis = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
  };

  try {
    begin_stage("generation");
    const std::size_t k = std::min(config.generation_examples, record.examples.size());
    std::vector<std::string> xs, ys;
    for (std::size_t i = 0; i < k; ++i) {
      xs.push_back(record.examples[i].input);
      ys.push_back(record.examples[i].output);
    }
    std::optional<Attention> attention;
    if (uses_learned_attention(config.ablation)) {
      if (!services.attention) throw AttentionMissingError("no attention source configured");
      attention = services.attention(record.category);
    } else if (config.ablation == Ablation::manual_attention) {
      if (!services.manual_attention) throw ConfigError("manual attention not loaded");
      attention = services.manual_attention;
    }
    if (attention) result.surrogate.attention_id = attention->id;
    result.generator_inputs = bundle_examples(xs);
    result.generator_outputs = bundle_examples(ys);
    const std::string p_s = generate_surrogate(generator, result.generator_inputs, result.generator_outputs,
                                               attention ? &*attention : nullptr, services.templates.generator);
    result.surrogate.text = p_s;
    end_stage();

    if (uses_pruning(config.ablation)) {
      begin_stage("pruning");
      if (!services.embeddings) throw ConfigError("pruning needs an embedding index");
      const std::span<const IOPair> used(record.examples.data(), k);
      const PruneOutcome pruned =
          prune_surrogate(p_s, used, target, *services.embeddings, config.prune, *services.tagger);
      result.surrogate.text = pruned.prompt.text;
      result.surrogate.masked_words = pruned.prompt.masked_words;
      result.surrogate.placeholder_count = pruned.prompt.placeholder_count;
      end_stage();
    }

    begin_stage("evaluation");
    std::span<const std::string> extra;
    if (auto it = services.held_out_inputs.find(record.category.name()); it != services.held_out_inputs.end()) {
      extra = it->second;
    }
    const auto n = static_cast<std::size_t>(config.eval.test_inputs);
    const auto inputs = evaluation_inputs(record, k, n, extra);
    if (inputs.size() < n) {
      throw PreconditionError("record " + record.id + " has " + std::to_string(inputs.size()) +
                              " usable evaluation inputs, " + std::to_string(n) + " needed");
    }
    const std::string target_prompt = record.prompt_text.value_or("");
    OutputGrid surrogate_grid, target_grid;
    for (const auto& x : inputs) {
      auto& s_row = surrogate_grid.emplace_back();
      auto& t_row = target_grid.emplace_back();
      for (int j = 0; j < config.eval.samples; ++j) {
        t_row.push_back(complete(target, target_prompt, x));
        s_row.push_back(complete(target, result.surrogate.text, x));
      }
    }
    result.similarity = similarity_triple(surrogate_grid, target_grid, *services.syntax);
    result.success = attack_success(result.similarity, config.thresholds);
    end_stage();
  } catch (const Error& e) {
    end_stage();
    const auto* be = dynamic_cast<const BackendError*>(&e);
    throw AttackError(stage, e.what(), be && be->is_transport(), result);
  }
  return result;
}

std::map<Category, Attention> learn_all(const Dataset& records, const Services& services,
                                        const MutationConfig& config, std::vector<std::string>* errors) {
  if (!services.target || !services.generator) throw ConfigError("mutation: target and generator backends are required");
  Backend& differ = services.differ ? *services.differ : *services.target;
  std::vector<std::pair<Category, std::future<Attention>>> jobs;
  std::vector<std::vector<PromptRecord>> groups;
  const auto categories = records.categories();
  groups.reserve(categories.size());
  for (const auto& c : categories) groups.push_back(records.in_category(c));
  for (std::size_t i = 0; i < categories.size(); ++i) {
    jobs.emplace_back(categories[i], std::async(std::launch::async, [&, i] {
                        return learn_attention(groups[i], *services.target, *services.generator, differ, config,
                                               services.templates);
                      }));
  }
  std::map<Category, Attention> out;
  for (auto& [c, f] : jobs) {
    try {
      out.emplace(c, f.get());
    } catch (const Error& e) {
      if (errors) errors->push_back(c.name() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace prsa
