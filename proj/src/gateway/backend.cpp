#include <algorithm>

#include "prsa/error.hpp"
#include "prsa/gateway.hpp"
#include "prsa/mock_llm.hpp"
#include "prsa/remote_backend.hpp"
#include "prsa/text.hpp"

namespace prsa {

void BackendConfig::validate() const {
  if (model_tag.empty()) throw ConfigError("backend: model_tag is required");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw ConfigError("backend: temperature must lie in [0, 2]");
  }
  if (max_retries < 0 || max_retries > 20) throw ConfigError("backend: max_retries must lie in [0, 20]");
  if (max_in_flight < 1) throw ConfigError("backend: max_in_flight must be positive");
  if (rate_limit.requests < 1 || rate_limit.interval.count() <= 0) {
    throw ConfigError("backend: rate limit needs a positive request count and interval");
  }
  if (kind == BackendKind::remote) {
    if (endpoint.empty()) throw ConfigError("remote backend: endpoint is required");
    if (api_key_env.empty()) throw ConfigError("remote backend: api_key_env (credential reference) is required");
  } else {
    if (!mock_seed) throw ConfigError("mock backend: a directive-universe seed is required");
  }
}

double role_temperature(const BackendConfig& config, Role role) {
  return role == Role::target ? config.temperature : 0.0;
}

void to_json(json& j, const BackendConfig& c) {
  j = json{{"kind", c.kind == BackendKind::remote ? "remote" : "mock"},
           {"model_tag", c.model_tag},
           {"temperature", c.temperature},
           {"max_retries", c.max_retries},
           {"timeout_ms", c.timeout.count()},
           {"rate_limit", {{"requests", c.rate_limit.requests},
                           {"interval_ms", c.rate_limit.interval.count()}}},
           {"max_in_flight", c.max_in_flight}};
  if (c.kind == BackendKind::remote) {
    j["endpoint"] = c.endpoint;
    j["api_key_env"] = c.api_key_env;
    j["api_style"] = c.api_style == ApiStyle::chat ? "chat" : "completion";
    j["backoff_ms"] = c.backoff_base.count();
  } else {
    j["seed"] = c.mock_seed ? json(*c.mock_seed) : json(nullptr);
    if (!c.hidden_prompt.empty()) j["hidden_prompt"] = c.hidden_prompt;
  }
}

void from_json(const json& j, BackendConfig& c) {
  const auto kind = j.value("kind", std::string("mock"));
  if (kind == "remote") {
    c.kind = BackendKind::remote;
  } else if (kind == "mock") {
    c.kind = BackendKind::mock;
  } else {
    throw ConfigError("backend: unknown kind '" + kind + "'");
  }
  c.model_tag = j.value("model_tag", c.model_tag);
  c.temperature = j.value("temperature", c.temperature);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.timeout = std::chrono::milliseconds(j.value("timeout_ms", c.timeout.count()));
  if (auto rl = j.find("rate_limit"); rl != j.end()) {
    c.rate_limit.requests = rl->value("requests", c.rate_limit.requests);
    c.rate_limit.interval = std::chrono::milliseconds(rl->value("interval_ms", c.rate_limit.interval.count()));
  }
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  c.endpoint = j.value("endpoint", c.endpoint);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  const auto style = j.value("api_style", std::string("chat"));
  if (style != "chat" && style != "completion") throw ConfigError("backend: unknown api_style '" + style + "'");
  c.api_style = style == "chat" ? ApiStyle::chat : ApiStyle::completion;
  c.backoff_base = std::chrono::milliseconds(j.value("backoff_ms", c.backoff_base.count()));
  if (auto s = j.find("seed"); s != j.end() && !s->is_null()) c.mock_seed = s->get<std::uint64_t>();
  c.hidden_prompt = j.value("hidden_prompt", c.hidden_prompt);
}

namespace {
constexpr std::string_view kBundleOpen = "=== Example ";
}

std::string bundle_examples(const std::vector<std::string>& parts) {
  if (parts.size() == 1) return parts.front();
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += "\n";
    out += std::string(kBundleOpen) + std::to_string(i + 1) + " ===\n" + parts[i];
  }
  return out;
}

std::vector<std::string> unbundle_examples(std::string_view payload) {
  if (payload.substr(0, kBundleOpen.size()) != kBundleOpen) return {std::string(payload)};
  std::vector<std::string> parts;
  std::string current;
  bool open = false;
  for (const auto& line : text::split_lines(payload)) {
    if (line.rfind(kBundleOpen, 0) == 0 && line.size() >= 4 && line.compare(line.size() - 4, 4, " ===") == 0) {
      if (open) parts.push_back(text::trim(current));
      current.clear();
      open = true;
      continue;
    }
    if (!current.empty()) current += "\n";
    current += line;
  }
  if (open) parts.push_back(text::trim(current));
  return parts;
}

Backend::Backend(BackendConfig config) : config_(std::move(config)) {}

std::string Backend::generate(std::string_view x, std::string_view y, const Attention* attention,
                              const RoleTemplate& tmpl) {
  const std::string request = tmpl.render(
      {{"input", std::string(x)}, {"output", std::string(y)}, {"attention", render_attention(attention)}});
  return text::trim(complete("", request, role_temperature(config_, Role::generator)));
}

DifferenceReport Backend::analyze(std::string_view y_surrogate, std::string_view y_target,
                                  const RoleTemplate& tmpl) {
  const std::string request =
      tmpl.render({{"output_a", std::string(y_surrogate)}, {"output_b", std::string(y_target)}});
  const double t = role_temperature(config_, Role::differ);
  try {
    return parse_difference_block(complete("", request, t));
  } catch (const AnalyzerFormatError&) {
    const std::string retry = request +
                              "\n\nYour previous answer could not be parsed. Reply with only the fenced "
                              "block, one `factor | description | loss` line per factor.";
    try {
      return parse_difference_block(complete("", retry, t));
    } catch (const AnalyzerFormatError& e) {
      throw AnalyzerFormatError(std::string("analyzer format: ") + e.what());
    }
  }
}

BackendPtr make_backend(const BackendConfig& config) {
  config.validate();
  if (config.kind == BackendKind::remote) return std::make_shared<RemoteBackend>(config);
  return std::make_shared<MockBackend>(config);
}

CountingBackend::CountingBackend(BackendPtr inner) : Backend(inner->config()), inner_(std::move(inner)) {}

std::string CountingBackend::complete(std::string_view prompt, std::string_view input, double temperature) {
  ++calls_;
  return inner_->complete(prompt, input, temperature);
}

std::string CountingBackend::generate(std::string_view x, std::string_view y, const Attention* attention,
                                      const RoleTemplate& tmpl) {
  ++calls_;
  return inner_->generate(x, y, attention, tmpl);
}

DifferenceReport CountingBackend::analyze(std::string_view y_surrogate, std::string_view y_target,
                                          const RoleTemplate& tmpl) {
  ++calls_;
  return inner_->analyze(y_surrogate, y_target, tmpl);
}

std::string complete(Backend& backend, std::string_view prompt, std::string_view input) {
  auto out = backend.complete(prompt, input, role_temperature(backend.config(), Role::target));
  if (text::trim(out).empty()) throw BackendError(BackendError::Kind::empty_completion, "empty completion");
  return out;
}

std::string generate_surrogate(Backend& backend, std::string_view x, std::string_view y,
                               const Attention* attention, const RoleTemplate& tmpl) {
  if (tmpl.role() != Role::generator) throw PreconditionError("generate_surrogate: needs a generator template");
  const Attention* effective = (attention && !attention->empty()) ? attention : nullptr;
  std::string out = text::trim(backend.generate(x, y, effective, tmpl));
  if (out.empty()) throw DegenerateSurrogateError("degenerate surrogate: empty");
  if (text::collapse_whitespace(out) == text::collapse_whitespace(y)) {
    throw DegenerateSurrogateError("degenerate surrogate: echoes the example output");
  }
  return out;
}

DifferenceReport analyze_difference(Backend& backend, std::string_view y_surrogate, std::string_view y_target,
                                    const RoleTemplate& tmpl) {
  if (tmpl.role() != Role::differ) throw PreconditionError("analyze_difference: needs a differ template");
  DifferenceReport report = backend.analyze(y_surrogate, y_target, tmpl);
  for (auto& f : report.factors) f.name = normalize_factor_name(f.name);
  validate_report(report);
  return report;
}

}  // namespace prsa
