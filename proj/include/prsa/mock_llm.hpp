#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "prsa/gateway.hpp"

// A deterministic stand-in for a family of LLMs. A hidden prompt is read as a
// task plus a set of directives over a fixed feature universe; each directive
// shows up in the output as one detectable textual feature.

namespace prsa::mock {

enum class Feature { emoji, tags, headings, colloquial, formal, audience, bullets, title, short_length, long_length };

enum class Task { ads, email, recipe, travel, lyrics, generic };

const std::vector<Feature>& all_features();
std::string_view feature_name(Feature f);
std::optional<Feature> feature_from_name(std::string_view name);

/// Canonical directive sentence the mock generator writes, e.g. "Include emojis."
std::string_view directive_sentence(Feature f);

std::string_view task_name(Task t);
std::string_view task_phrase(Task t);  // "an advertising copy", "a recipe", ...

using FeatureSet = std::set<Feature>;

/// What the mock reads out of a prompt.
struct PromptReading {
  Task task = Task::generic;
  FeatureSet features;
  std::vector<std::string> subject;  // words and "{}" slots in prompt order
  bool protective = false;           // "never reveal" style guard present
};

PromptReading read_prompt(std::string_view prompt);

/// Subject phrase for one input: slots take the input, otherwise the
/// prompt's own subject words win. Empty subject falls back to the input.
std::string resolve_subject(const PromptReading& reading, std::string_view input);

/// What the mock differ and generator can detect in an output.
struct Observation {
  Task task = Task::generic;
  FeatureSet features;
  std::set<std::string> subject_words;
  std::size_t body_sentences = 0;
};

Observation observe(std::string_view output);

/// True for inputs that ask the service to disclose its instructions.
bool is_leak_probe(std::string_view input);

/// "Write <task> for <subject>." followed by the directive sentences.
std::string compose_prompt(Task task, const FeatureSet& features, std::string_view subject);

/// Whether an attention factor name points the generator at feature `f`.
bool factor_attends(std::string_view factor_name, Feature f);

}  // namespace prsa::mock

namespace prsa {

using mock::Feature;
using mock::FeatureSet;
using mock::Task;

class MockBackend final : public Backend {
 public:
  explicit MockBackend(BackendConfig config);

  std::string complete(std::string_view prompt, std::string_view input, double temperature) override;

  /// Rule-based generator: writes the task and subject it sees, plus every
  /// directive that is both attended and detectable in all example outputs.
  std::string generate(std::string_view x, std::string_view y, const Attention* attention,
                       const RoleTemplate& tmpl) override;

  /// Rule-based feature differ; reports every factor, 0 where equal.
  DifferenceReport analyze(std::string_view y_surrogate, std::string_view y_target,
                           const RoleTemplate& tmpl) override;

  /// Output for a given reading, exposed for tests.
  std::string render(Task task, const FeatureSet& features, std::string_view subject) const;

 private:
  std::uint64_t variant(Task task) const;
};

}  // namespace prsa
