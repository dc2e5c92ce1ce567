#include <fstream>
#include <sstream>

#include "prsa/error.hpp"
#include "prsa/mutation.hpp"
#include "prsa/text.hpp"

namespace prsa {

void MutationConfig::validate() const {
  if (iterations < 0) throw ConfigError("mutation: iterations must be non-negative");
  if (!(retention >= 0.0 && retention <= 1.0)) throw ConfigError("mutation: retention threshold must lie in [0, 1]");
  if (sample_cap == 0) throw ConfigError("mutation: sample cap must be positive");
}

namespace {

bool prefer_description(const std::string& candidate, const std::string& current) {
  if (candidate.size() != current.size()) return candidate.size() > current.size();
  return candidate < current;
}

// One generate/complete/analyze round on a record's first example.
DifferenceReport mutation_step(const PromptRecord& record, Backend& target, Backend& generator, Backend& differ,
                               const Attention* attention, const RoleTemplates& templates) {
  const IOPair& ex = record.examples.front();
  const std::string surrogate = generate_surrogate(generator, ex.input, ex.output, attention, templates.generator);
  const std::string y_s = complete(target, surrogate, ex.input);
  return analyze_difference(differ, y_s, ex.output, templates.differ);
}

}  // namespace

Attention update_attention(const Attention& a, const DifferenceReport& report, double tau) {
  Attention out = a;
  for (const auto& f : report.factors) {
    if (!(f.loss >= tau)) continue;
    const std::string key = normalize_factor_name(f.name);
    if (key.empty()) continue;
    auto [it, inserted] = out.factors.try_emplace(key, AttentionFactor{key, f.description, f.loss});
    if (inserted) continue;
    AttentionFactor& existing = it->second;
    existing.loss = std::max(existing.loss, f.loss);
    if (prefer_description(f.description, existing.description)) existing.description = f.description;
  }
  return out;
}

Attention learn_attention(std::span<const PromptRecord> records, Backend& target, Backend& generator,
                          Backend& differ, const MutationConfig& config, const RoleTemplates& templates,
                          LearnLog* log) {
  config.validate();
  if (records.empty()) throw PreconditionError("learn_attention: no records");
  const Category category = records.front().category;
  for (const auto& r : records) {
    if (r.category != category) throw PreconditionError("learn_attention: records span several categories");
    if (r.examples.empty()) throw PreconditionError("learn_attention: record " + r.id + " has no examples");
  }
  const auto sample = records.first(std::min(records.size(), config.sample_cap));

  LearnLog local;
  LearnLog& lg = log ? *log : local;
  Attention a;
  a.category = category;
  a.model_tag = target.config().model_tag;

  // Runs one iteration, retrying once on failure. Returns false if both fail.
  auto attempt = [&](const PromptRecord& r, bool first_pass) {
    const Attention* current = first_pass ? nullptr : &a;
    for (int tries = 0; tries < 2; ++tries) {
      try {
        const DifferenceReport report = mutation_step(r, target, generator, differ, current, templates);
        a = update_attention(a, report, config.retention);
        ++lg.iterations_run;
        return true;
      } catch (const Error& e) {
        if (tries == 1) lg.errors.push_back(r.id + ": " + e.what());
      }
    }
    return false;
  };

  std::vector<bool> alive(sample.size(), true);
  if (config.mode == LoopMode::per_record) {
    for (std::size_t i = 0; i < sample.size(); ++i) {
      for (int it = 0; it < config.iterations && alive[i]; ++it) alive[i] = attempt(sample[i], it == 0);
    }
  } else {
    for (int it = 0; it < config.iterations; ++it) {
      for (std::size_t i = 0; i < sample.size(); ++i) {
        if (alive[i]) alive[i] = attempt(sample[i], it == 0);
      }
    }
  }

  for (bool ok : alive) (ok ? lg.records_used : lg.records_failed) += 1;
  if (lg.records_used == 0) throw PreconditionError("learn_attention: no usable records in " + category.name());

  a.samples_used = lg.records_used;
  a.iterations_per_sample = static_cast<std::size_t>(config.iterations);
  a.id = attention_fingerprint(a);
  return a;
}

Attention parse_manual_attention(std::string_view content, const Category& category) {
  Attention a;
  a.category = category;
  a.model_tag = "manual";
  for (const auto& raw : text::split_lines(content)) {
    const std::string line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto bar = line.find('|');
    const std::string name = normalize_factor_name(line.substr(0, bar));
    const std::string desc = bar == std::string::npos ? "" : text::trim(std::string_view(line).substr(bar + 1));
    if (name.empty()) continue;
    a.factors[name] = AttentionFactor{name, desc, 1.0};
  }
  if (a.empty()) throw ConfigError("manual attention: no factors");
  a.id = attention_fingerprint(a);
  return a;
}

Attention load_manual_attention(const std::filesystem::path& path, const Category& category) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open factor file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manual_attention(ss.str(), category);
}

void to_json(json& j, const MutationConfig& c) {
  j = json{{"iterations", c.iterations},
           {"retention", c.retention},
           {"sample_cap", c.sample_cap},
           {"mode", c.mode == LoopMode::global ? "global" : "per_record"}};
}

void from_json(const json& j, MutationConfig& c) {
  c.iterations = j.value("iterations", c.iterations);
  c.retention = j.value("retention", c.retention);
  c.sample_cap = j.value("sample_cap", c.sample_cap);
  const auto mode = j.value("mode", std::string("per_record"));
  if (mode != "per_record" && mode != "global") throw ConfigError("mutation: unknown mode '" + mode + "'");
  c.mode = mode == "global" ? LoopMode::global : LoopMode::per_record;
}

}  // namespace prsa
