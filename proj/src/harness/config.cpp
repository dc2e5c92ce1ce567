#include "prsa/config.hpp"

#include <fstream>
#include <sstream>

namespace prsa {

namespace {

std::filesystem::path path_or(const json& j, const char* key, const std::filesystem::path& fallback) {
  return j.contains(key) ? std::filesystem::path(j.at(key).get<std::string>()) : fallback;
}

}  // namespace

void from_json(const json& j, RunConfig& c) {
  if (j.contains("target")) j.at("target").get_to(c.target);
  if (j.contains("generator")) c.generator = j.at("generator").get<BackendConfig>();
  if (j.contains("differ")) c.differ = j.at("differ").get<BackendConfig>();
  if (j.contains("attack")) j.at("attack").get_to(c.attack);
  c.embeddings = path_or(j, "embeddings", c.embeddings);
  c.store_dir = path_or(j, "store_dir", c.store_dir);
  c.generator_template = path_or(j, "generator_template", c.generator_template);
  c.differ_template = path_or(j, "differ_template", c.differ_template);
  c.held_out = path_or(j, "held_out", c.held_out);
  c.jobs = j.value("jobs", c.jobs);
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"target", c.target}, {"attack", c.attack}, {"store_dir", c.store_dir.string()}, {"jobs", c.jobs}};
  if (c.generator) j["generator"] = *c.generator;
  if (c.differ) j["differ"] = *c.differ;
  if (!c.embeddings.empty()) j["embeddings"] = c.embeddings.string();
  if (!c.generator_template.empty()) j["generator_template"] = c.generator_template.string();
  if (!c.differ_template.empty()) j["differ_template"] = c.differ_template.string();
  if (!c.held_out.empty()) j["held_out"] = c.held_out.string();
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return json::parse(in).get<RunConfig>();
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

Services make_services(const RunConfig& config) {
  Services s;
  s.target = make_backend(config.target);
  s.generator = config.generator ? make_backend(*config.generator) : s.target;
  s.differ = config.differ ? make_backend(*config.differ) : s.target;
  if (!config.embeddings.empty()) {
    s.embeddings = std::make_shared<EmbeddingIndex>(EmbeddingIndex::load(config.embeddings));
  }
  if (!config.generator_template.empty()) {
    s.templates.generator = RoleTemplate::load(config.generator_template, Role::generator);
  }
  if (!config.differ_template.empty()) s.templates.differ = RoleTemplate::load(config.differ_template, Role::differ);
  if (!config.held_out.empty()) {
    std::ifstream in(config.held_out);
    if (!in) throw ConfigError("cannot open held-out inputs " + config.held_out.string());
    json::parse(in).get_to(s.held_out_inputs);
  }
  if (config.attack.ablation == Ablation::manual_attention) {
    s.manual_attention = load_manual_attention(config.attack.manual_factors, Category("manual"));
  }
  return s;
}

}  // namespace prsa
