#pragma once

#include <filesystem>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "prsa/core.hpp"
#include "prsa/gateway.hpp"

namespace prsa {

enum class LoopMode {
  per_record,  // N iterations on each record, attention carried across records
  global,      // N passes over the whole record list
};

struct MutationConfig {
  int iterations = 3;          // N
  double retention = 0.3;      // tau
  std::size_t sample_cap = 12;
  LoopMode mode = LoopMode::per_record;

  void validate() const;
};

/// Keeps report factors with loss >= tau, max-merging into `a`. On a name
/// collision the longer description survives (lexicographically smaller on
/// equal length), so the fold does not depend on report order.
Attention update_attention(const Attention& a, const DifferenceReport& report, double tau);

struct LearnLog {
  std::size_t records_used = 0;
  std::size_t records_failed = 0;
  std::size_t iterations_run = 0;
  std::vector<std::string> errors;  // "record-id: message"
};

/// Learns per-category attention from output differences. All records must
/// share one category; at most `sample_cap` are used, in order. A record
/// whose iteration fails twice in a row is dropped and the run continues.
Attention learn_attention(std::span<const PromptRecord> records, Backend& target, Backend& generator,
                          Backend& differ, const MutationConfig& config,
                          const RoleTemplates& templates = {}, LearnLog* log = nullptr);

/// Versioned attention store on disk: <dir>/<key>/v<N>.json plus an
/// index.json per key listing every version.
class AttentionStore {
 public:
  explicit AttentionStore(std::filesystem::path dir);

  /// Stores a new version and returns its number (1-based).
  int put(const Attention& attention);

  /// Latest version. Throws AttentionMissingError when nothing was stored.
  Attention get(const Category& category, const std::string& model_tag) const;

  /// Every stored version, oldest first.
  std::vector<Attention> history(const Category& category, const std::string& model_tag) const;

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path key_dir(const Category& category, const std::string& model_tag) const;
  json read_index(const std::filesystem::path& key_dir) const;

  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
};

/// Reads a factor file: one factor per line, "name" or "name | description".
Attention load_manual_attention(const std::filesystem::path& path, const Category& category);
Attention parse_manual_attention(std::string_view content, const Category& category);

void to_json(json& j, const MutationConfig& c);
void from_json(const json& j, MutationConfig& c);

}  // namespace prsa
