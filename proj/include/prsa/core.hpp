#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace prsa {

using json = nlohmann::json;

/// Prompt category, stored normalized (lowercase, collapsed whitespace).
class Category {
 public:
  Category() = default;
  explicit Category(std::string_view name);

  const std::string& name() const noexcept { return name_; }
  bool empty() const noexcept { return name_.empty(); }
  /// True for the eighteen marketplace categories the toolkit ships with.
  bool is_known() const;

  friend auto operator<=>(const Category&, const Category&) = default;

 private:
  std::string name_;
};

const std::vector<std::string>& known_categories();

struct IOPair {
  std::string input;
  std::string output;

  friend bool operator==(const IOPair&, const IOPair&) = default;
};

struct PromptRecord {
  std::string id;
  Category category;
  std::string target_model_tag;
  std::optional<std::string> prompt_text;
  std::vector<IOPair> examples;

  friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

struct SurrogatePrompt {
  std::string text;
  std::vector<std::string> masked_words;
  std::size_t placeholder_count = 0;
  std::optional<std::string> attention_id;
  std::string source_record_id;
};

struct AttentionFactor {
  std::string name;
  std::string description;
  double loss = 0.0;

  friend bool operator==(const AttentionFactor&, const AttentionFactor&) = default;
};

/// Lowercase, trimmed, whitespace-collapsed factor key.
std::string normalize_factor_name(std::string_view name);

/// Learned per-category prompt attention.
struct Attention {
  Category category;
  std::string model_tag;
  std::map<std::string, AttentionFactor> factors;  // keyed by normalized name
  std::size_t samples_used = 0;
  std::size_t iterations_per_sample = 0;
  std::string id;

  bool empty() const noexcept { return factors.empty(); }
  friend bool operator==(const Attention&, const Attention&) = default;
};

/// Stable content-derived identifier for an attention value.
std::string attention_fingerprint(const Attention& attention);

struct DifferenceFactor {
  std::string name;
  std::string description;
  double loss = 0.0;
  bool clamped = false;  // loss was outside [0,1] and has been clamped
};

struct DifferenceReport {
  std::vector<DifferenceFactor> factors;

  const DifferenceFactor* find(std::string_view name) const;
};

/// Throws PreconditionError on duplicate names or out-of-range losses.
void validate_report(const DifferenceReport& report);

struct Thresholds {
  double semantic = 0.6;
  double syntactic = 0.75;
  double structural = 0.9;

  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

struct SimilarityTriple {
  double semantic = 0.0;
  double syntactic = 0.0;
  double structural = 0.0;
  // Pre-clamp Score values.
  double raw_semantic = 0.0;
  double raw_syntactic = 0.0;
  double raw_structural = 0.0;
  bool syntax_fallback = false;
};

struct StageCost {
  std::size_t calls = 0;
  double millis = 0.0;
};

struct AttackResult {
  std::string record_id;
  Category category;
  SurrogatePrompt surrogate;
  SimilarityTriple similarity;
  bool success = false;
  std::map<std::string, std::string> backend_tags;  // role -> model tag
  std::map<std::string, StageCost> stages;          // stage -> cost
  std::string generator_inputs;                      // exact (bundled) payloads sent to the generator
  std::string generator_outputs;
};

// JSON mapping for the on-disk formats.
void to_json(json& j, const IOPair& p);
void from_json(const json& j, IOPair& p);
void to_json(json& j, const PromptRecord& r);
void from_json(const json& j, PromptRecord& r);
void to_json(json& j, const AttentionFactor& f);
void from_json(const json& j, AttentionFactor& f);
void to_json(json& j, const Attention& a);
void from_json(const json& j, Attention& a);
void to_json(json& j, const Thresholds& t);
void from_json(const json& j, Thresholds& t);
void to_json(json& j, const SimilarityTriple& t);
void from_json(const json& j, SimilarityTriple& t);
void to_json(json& j, const SurrogatePrompt& s);
void to_json(json& j, const AttackResult& r);
void to_json(json& j, const DifferenceReport& r);

}  // namespace prsa
