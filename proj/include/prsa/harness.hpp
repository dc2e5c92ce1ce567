#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "prsa/dataset.hpp"
#include "prsa/error.hpp"
#include "prsa/gateway.hpp"
#include "prsa/metrics.hpp"
#include "prsa/mutation.hpp"
#include "prsa/pruning.hpp"
#include "prsa/syntax.hpp"

namespace prsa {

enum class Ablation {
  full,              // learned attention + pruning
  no_mutation,       // no attention
  no_pruning,        // learned attention, surrogate used verbatim
  manual_attention,  // hand-written factor list instead of learned attention
  naive,             // no attention, no pruning
};

std::string_view ablation_name(Ablation a);
Ablation parse_ablation(std::string_view name);

struct AttackConfig {
  Ablation ablation = Ablation::full;
  EvalConfig eval;
  PruneConfig prune;
  MutationConfig mutation;
  Thresholds thresholds;
  std::size_t generation_examples = 1;  // example pairs shown to the generator
  std::filesystem::path manual_factors;  // required for manual_attention
  std::filesystem::path report_path;

  void validate() const;
};

void to_json(json& j, const AttackConfig& c);
void from_json(const json& j, AttackConfig& c);

/// Where attack-time attention comes from, keyed by category.
using AttentionSource = std::function<Attention(const Category&)>;

/// Shared services for a run. Backends and the store are safe to share
/// across threads.
struct Services {
  BackendPtr target;
  BackendPtr generator;
  BackendPtr differ;  // defaults to target when unset
  std::shared_ptr<const EmbeddingIndex> embeddings;
  std::shared_ptr<const PosTagger> tagger = default_tagger();
  const SyntaxProvider* syntax = &default_syntax();
  RoleTemplates templates;
  AttentionSource attention;  // learned attention (full / no_pruning)
  std::optional<Attention> manual_attention;
  /// Extra inputs per category used when a record lacks held-out examples.
  std::map<std::string, std::vector<std::string>> held_out_inputs;
};

/// Attention source backed by a store, looked up under the target's model tag.
AttentionSource store_attention(std::shared_ptr<AttentionStore> store, std::string model_tag);

/// Attention source over an in-memory map; missing categories throw
/// AttentionMissingError.
AttentionSource map_attention(std::map<Category, Attention> attention);

/// A pipeline failure annotated with its stage. `partial` holds whatever
/// was computed before the failure.
class AttackError : public Error {
 public:
  AttackError(std::string stage, const std::string& what, bool transport, AttackResult partial);
  const std::string& stage() const noexcept { return stage_; }
  bool transport() const noexcept { return transport_; }
  const AttackResult& partial() const noexcept { return partial_; }

 private:
  std::string stage_;
  bool transport_;
  AttackResult partial_;
};

/// Inputs used for evaluation: the first example input, then held-out
/// example inputs, then the category's perturbation list; first n kept.
std::vector<std::string> evaluation_inputs(const PromptRecord& record, std::size_t generation_examples,
                                           std::size_t n, std::span<const std::string> extra);

AttackResult run_attack(const PromptRecord& record, const AttackConfig& config, const Services& services);

/// Learns attention for every category of `records` (categories run
/// concurrently) and returns it keyed by category.
std::map<Category, Attention> learn_all(const Dataset& records, const Services& services,
                                        const MutationConfig& config, std::vector<std::string>* errors = nullptr);

struct RecordFailure {
  std::string record_id;
  std::string stage;
  std::string message;
  bool transport = false;
};

struct CategorySummary {
  std::size_t records = 0;
  SimilarityTriple mean;
  double asr = 0.0;
};

struct CampaignReport {
  std::vector<AttackResult> results;
  std::vector<RecordFailure> failures;
  SimilarityTriple mean;
  double asr = 0.0;
  std::map<std::string, CategorySummary> per_category;
  Thresholds thresholds;
  json config;
  std::string started_at;
  std::string finished_at;

  /// True when more than half of the records failed on transport errors.
  bool transport_failure_majority() const;
};

/// Means, ASR and per-category summaries from the per-record results.
void aggregate(CampaignReport& report);

CampaignReport run_campaign(const Dataset& dataset, const AttackConfig& config, const Services& services,
                            int jobs = 1);

void to_json(json& j, const CampaignReport& r);
std::string summary_table(const CampaignReport& report);
void write_report(const CampaignReport& report, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Output obfuscation defense

inline constexpr std::string_view kMaskGlyph = "\xE2\x96\x88";

/// Replaces floor(ratio * n) of the n whitespace-delimited tokens with the
/// mask glyph. The masked set for a smaller ratio is always a subset of the
/// set for a larger one under the same seed.
std::string obfuscate_output(std::string_view y, double ratio, std::uint64_t seed);

struct DefensePoint {
  double ratio = 0.0;
  SimilarityTriple mean;
  double asr = 0.0;
  std::size_t evaluated = 0;
};

/// Attacks every record with its example outputs obfuscated at each ratio;
/// similarity is measured against the service's clean outputs.
std::vector<DefensePoint> defense_sweep(const Dataset& dataset, std::span<const double> ratios,
                                        const AttackConfig& config, const Services& services, std::uint64_t seed,
                                        int jobs = 1);

// ---------------------------------------------------------------------------
// Prompt-injection baseline

struct ProbeOutcome {
  std::string probe;
  std::string response;
  bool success = false;
  std::string error;
};

struct InjectionReport {
  std::vector<ProbeOutcome> probes;
  double success_rate = 0.0;
};

/// Sends each probe as the user input to a service whose instructions are
/// hidden; success when the normalized response contains the normalized
/// hidden prompt.
InjectionReport injection_baseline(Backend& service, std::string_view hidden_prompt,
                                   std::span<const std::string> probes);

/// One probe per line; the two-character sequence "\n" stands for a newline.
std::vector<std::string> load_probes(const std::filesystem::path& path);

void to_json(json& j, const InjectionReport& r);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string utc_timestamp();

}  // namespace prsa
