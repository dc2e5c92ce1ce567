#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prsa/core.hpp"

namespace prsa {

enum class BackendKind { remote, mock };
enum class ApiStyle { chat, completion };

/// The three LLM roles: the target model, the surrogate generator and the
/// output-difference analyzer.
enum class Role { target, generator, differ };

struct RateLimit {
  int requests = 60;
  std::chrono::milliseconds interval{60'000};
};

struct BackendConfig {
  BackendKind kind = BackendKind::mock;
  std::string model_tag = "mock-a";
  double temperature = 0.7;  // used for target-role calls; other roles use 0
  int max_retries = 3;
  std::chrono::milliseconds timeout{60'000};
  RateLimit rate_limit;
  int max_in_flight = 4;

  // remote
  std::string endpoint;      // e.g. https://api.example.com/v1/chat/completions
  std::string api_key_env;   // name of the environment variable holding the key
  ApiStyle api_style = ApiStyle::chat;
  std::chrono::milliseconds backoff_base{500};

  // mock
  std::optional<std::uint64_t> mock_seed;
  std::string hidden_prompt;  // service mode: used when a call carries no prompt

  /// Throws ConfigError when the kind-specific requirements are not met.
  void validate() const;
};

double role_temperature(const BackendConfig& config, Role role);

void to_json(json& j, const BackendConfig& c);
void from_json(const json& j, BackendConfig& c);

/// Meta-prompt for the generator or differ role, with named slots.
class RoleTemplate {
 public:
  RoleTemplate(Role role, std::string text);

  static RoleTemplate default_generator();
  static RoleTemplate default_differ();
  static RoleTemplate load(const std::filesystem::path& path, Role role);

  Role role() const noexcept { return role_; }
  const std::string& text() const noexcept { return text_; }

  /// Single-pass substitution; slot markers inside values are left alone.
  std::string render(const std::vector<std::pair<std::string, std::string>>& values) const;

  static std::vector<std::string> required_slots(Role role);

 private:
  Role role_;
  std::string text_;
};

/// Generator and differ templates used by one run.
struct RoleTemplates {
  RoleTemplate generator = RoleTemplate::default_generator();
  RoleTemplate differ = RoleTemplate::default_differ();
};

/// Factor names the default differ template asks the analyzer to consider.
const std::vector<std::string>& difference_dimensions();

/// "focus on: <name>" lines, description appended after a dash; empty attention renders "".
std::string render_attention(const Attention* attention);

/// Parses the fenced `factor | description | loss` block. Losses outside
/// [0,1] are clamped and flagged; duplicate names keep the larger loss.
/// Throws AnalyzerFormatError when no well-formed block is present.
DifferenceReport parse_difference_block(std::string_view response);

/// Several examples bundled into one payload with numbered delimiters.
std::string bundle_examples(const std::vector<std::string>& parts);
std::vector<std::string> unbundle_examples(std::string_view payload);

/// A completion service. Implementations must be safe to call concurrently.
class Backend {
 public:
  explicit Backend(BackendConfig config);
  virtual ~Backend() = default;

  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  const BackendConfig& config() const noexcept { return config_; }

  /// Raw completion: `prompt` is the system/instruction text, `input` the
  /// user payload.
  virtual std::string complete(std::string_view prompt, std::string_view input, double temperature) = 0;

  /// Generator role. The default renders `tmpl` and asks complete() at
  /// temperature 0.
  virtual std::string generate(std::string_view x, std::string_view y, const Attention* attention,
                               const RoleTemplate& tmpl);

  /// Differ role. The default renders `tmpl`, parses the structured block
  /// and re-asks once on a malformed answer.
  virtual DifferenceReport analyze(std::string_view y_surrogate, std::string_view y_target,
                                   const RoleTemplate& tmpl);

 protected:
  BackendConfig config_;
};

using BackendPtr = std::shared_ptr<Backend>;

BackendPtr make_backend(const BackendConfig& config);

/// Counts calls per instance while forwarding to a shared backend.
class CountingBackend final : public Backend {
 public:
  explicit CountingBackend(BackendPtr inner);

  std::string complete(std::string_view prompt, std::string_view input, double temperature) override;
  std::string generate(std::string_view x, std::string_view y, const Attention* attention,
                       const RoleTemplate& tmpl) override;
  DifferenceReport analyze(std::string_view y_surrogate, std::string_view y_target,
                           const RoleTemplate& tmpl) override;

  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  BackendPtr inner_;
  std::atomic<std::size_t> calls_{0};
};

// Role-level operations.

/// Target-role completion at the configured temperature.
std::string complete(Backend& backend, std::string_view prompt, std::string_view input);

/// Generator role. Rejects empty output and output that just echoes `y`.
std::string generate_surrogate(Backend& backend, std::string_view x, std::string_view y,
                               const Attention* attention,
                               const RoleTemplate& tmpl = RoleTemplate::default_generator());

DifferenceReport analyze_difference(Backend& backend, std::string_view y_surrogate,
                                    std::string_view y_target,
                                    const RoleTemplate& tmpl = RoleTemplate::default_differ());

}  // namespace prsa
