#include <algorithm>
#include <cstdio>
#include <set>

#include "prsa/core.hpp"
#include "prsa/error.hpp"
#include "prsa/text.hpp"

namespace prsa {

Category::Category(std::string_view name) : name_(text::normalize(name)) {}

const std::vector<std::string>& known_categories() {
  static const std::vector<std::string> names = {
      "ads",      "business", "code",    "data",  "email", "fashion",
      "food",     "game",     "health",  "idea",  "language", "music",
      "seo",      "sport",    "study",   "translation", "travel", "writing"};
  return names;
}

bool Category::is_known() const {
  const auto& names = known_categories();
  return std::find(names.begin(), names.end(), name_) != names.end();
}

std::string normalize_factor_name(std::string_view name) { return text::normalize(name); }

std::string attention_fingerprint(const Attention& attention) {
  // FNV-1a over the canonical factor listing.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  mix(attention.category.name());
  mix(attention.model_tag);
  for (const auto& [name, f] : attention.factors) {
    mix(name);
    mix(f.description);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", f.loss);
    mix(buf);
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

const DifferenceFactor* DifferenceReport::find(std::string_view name) const {
  const std::string key = normalize_factor_name(name);
  for (const auto& f : factors) {
    if (normalize_factor_name(f.name) == key) return &f;
  }
  return nullptr;
}

void validate_report(const DifferenceReport& report) {
  std::set<std::string> seen;
  for (const auto& f : report.factors) {
    const auto key = normalize_factor_name(f.name);
    if (key.empty()) throw PreconditionError("difference factor with empty name");
    if (!seen.insert(key).second) {
      throw PreconditionError("duplicate difference factor '" + key + "'");
    }
    if (!(f.loss >= 0.0 && f.loss <= 1.0)) {
      throw PreconditionError("difference factor '" + key + "' has loss outside [0,1]");
    }
  }
}

void to_json(json& j, const IOPair& p) { j = json{{"input", p.input}, {"output", p.output}}; }

void from_json(const json& j, IOPair& p) {
  p.input = j.value("input", std::string{});
  p.output = j.at("output").get<std::string>();
}

void to_json(json& j, const PromptRecord& r) {
  j = json{{"id", r.id},
           {"category", r.category.name()},
           {"target_model", r.target_model_tag},
           {"examples", r.examples}};
  if (r.prompt_text) j["prompt"] = *r.prompt_text;
}

void from_json(const json& j, PromptRecord& r) {
  r.id = j.at("id").get<std::string>();
  r.category = Category(j.at("category").get<std::string>());
  r.target_model_tag = j.value("target_model", std::string{});
  if (auto it = j.find("prompt"); it != j.end() && !it->is_null()) {
    r.prompt_text = it->get<std::string>();
  } else {
    r.prompt_text.reset();
  }
  r.examples = j.at("examples").get<std::vector<IOPair>>();
}

void to_json(json& j, const AttentionFactor& f) {
  j = json{{"name", f.name}, {"description", f.description}, {"loss", f.loss}};
}

void from_json(const json& j, AttentionFactor& f) {
  f.name = normalize_factor_name(j.at("name").get<std::string>());
  f.description = j.value("description", std::string{});
  f.loss = j.at("loss").get<double>();
}

void to_json(json& j, const Attention& a) {
  json factors = json::array();
  for (const auto& [_, f] : a.factors) factors.push_back(f);
  j = json{{"id", a.id},
           {"category", a.category.name()},
           {"model_tag", a.model_tag},
           {"samples_used", a.samples_used},
           {"iterations_per_sample", a.iterations_per_sample},
           {"factors", factors}};
}

void from_json(const json& j, Attention& a) {
  a.id = j.value("id", std::string{});
  a.category = Category(j.at("category").get<std::string>());
  a.model_tag = j.value("model_tag", std::string{});
  a.samples_used = j.value("samples_used", std::size_t{0});
  a.iterations_per_sample = j.value("iterations_per_sample", std::size_t{0});
  a.factors.clear();
  for (const auto& fj : j.at("factors")) {
    auto f = fj.get<AttentionFactor>();
    a.factors[f.name] = f;
  }
}

void to_json(json& j, const Thresholds& t) {
  j = json{{"semantic", t.semantic}, {"syntactic", t.syntactic}, {"structural", t.structural}};
}

void from_json(const json& j, Thresholds& t) {
  t.semantic = j.value("semantic", t.semantic);
  t.syntactic = j.value("syntactic", t.syntactic);
  t.structural = j.value("structural", t.structural);
}

void to_json(json& j, const SimilarityTriple& t) {
  j = json{{"semantic", t.semantic},
           {"syntactic", t.syntactic},
           {"structural", t.structural},
           {"raw", {{"semantic", t.raw_semantic},
                    {"syntactic", t.raw_syntactic},
                    {"structural", t.raw_structural}}},
           {"syntax_fallback", t.syntax_fallback}};
}

void from_json(const json& j, SimilarityTriple& t) {
  t.semantic = j.at("semantic").get<double>();
  t.syntactic = j.at("syntactic").get<double>();
  t.structural = j.at("structural").get<double>();
  if (auto raw = j.find("raw"); raw != j.end()) {
    t.raw_semantic = raw->value("semantic", t.semantic);
    t.raw_syntactic = raw->value("syntactic", t.syntactic);
    t.raw_structural = raw->value("structural", t.structural);
  } else {
    t.raw_semantic = t.semantic;
    t.raw_syntactic = t.syntactic;
    t.raw_structural = t.structural;
  }
  t.syntax_fallback = j.value("syntax_fallback", false);
}

void to_json(json& j, const SurrogatePrompt& s) {
  j = json{{"text", s.text},
           {"masked_words", s.masked_words},
           {"placeholder_count", s.placeholder_count},
           {"source_record_id", s.source_record_id}};
  j["attention_id"] = s.attention_id ? json(*s.attention_id) : json(nullptr);
}

void to_json(json& j, const AttackResult& r) {
  json stages = json::object();
  for (const auto& [name, cost] : r.stages) {
    stages[name] = json{{"calls", cost.calls}, {"millis", cost.millis}};
  }
  j = json{{"record_id", r.record_id},
           {"category", r.category.name()},
           {"surrogate", r.surrogate},
           {"similarity", r.similarity},
           {"success", r.success},
           {"backend_tags", r.backend_tags},
           {"stages", stages},
           {"generator_payload", {{"inputs", r.generator_inputs}, {"outputs", r.generator_outputs}}}};
}

void to_json(json& j, const DifferenceReport& r) {
  j = json::array();
  for (const auto& f : r.factors) {
    j.push_back(json{{"name", f.name},
                     {"description", f.description},
                     {"loss", f.loss},
                     {"clamped", f.clamped}});
  }
}

}  // namespace prsa
