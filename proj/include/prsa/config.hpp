#pragma once

#include <filesystem>
#include <optional>

#include "prsa/harness.hpp"

namespace prsa {

/// Everything a CLI run needs, read from a JSON file and then overridden by
/// command-line flags.
struct RunConfig {
  BackendConfig target;
  std::optional<BackendConfig> generator;  // defaults to the target
  std::optional<BackendConfig> differ;     // defaults to the target
  AttackConfig attack;
  std::filesystem::path embeddings;
  std::filesystem::path store_dir = "attention_store";
  std::filesystem::path generator_template;
  std::filesystem::path differ_template;
  std::filesystem::path held_out;  // JSON object: category -> list of inputs
  int jobs = 1;
};

void from_json(const json& j, RunConfig& c);
void to_json(json& j, const RunConfig& c);

RunConfig load_run_config(const std::filesystem::path& path);

/// Builds backends, templates, embeddings, held-out inputs and the manual
/// factor list. Attention is left for the caller to attach.
Services make_services(const RunConfig& config);

}  // namespace prsa
