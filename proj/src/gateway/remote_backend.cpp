#include "prsa/remote_backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>

#include "prsa/error.hpp"
#include "prsa/text.hpp"

namespace prsa {

RateLimiter::RateLimiter(RateLimit limit)
    : capacity_(static_cast<double>(limit.requests)),
      per_ms_(static_cast<double>(limit.requests) / static_cast<double>(limit.interval.count())),
      tokens_(capacity_),
      last_(clock::now()) {}

void RateLimiter::refill(clock::time_point now) {
  const double elapsed = std::chrono::duration<double, std::milli>(now - last_).count();
  tokens_ = std::min(capacity_, tokens_ + elapsed * per_ms_);
  last_ = now;
}

void RateLimiter::acquire() {
  for (;;) {
    std::chrono::duration<double, std::milli> wait{};
    {
      std::lock_guard lock(mu_);
      refill(clock::now());
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration<double, std::milli>((1.0 - tokens_) / per_ms_);
    }
    std::this_thread::sleep_for(wait);
  }
}

namespace {

std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("remote backend: endpoint must be an absolute URL");
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("remote backend: unsupported scheme " + scheme);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

RemoteBackend::RemoteBackend(BackendConfig config)
    : Backend(std::move(config)),
      limiter_(config_.rate_limit),
      in_flight_(std::clamp<std::ptrdiff_t>(config_.max_in_flight, 1, 1024)),
      rng_state_(std::random_device{}()) {
  config_.validate();
  std::tie(origin_, path_) = split_endpoint(config_.endpoint);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (origin_.rfind("https", 0) == 0) throw ConfigError("remote backend: built without TLS support");
#endif
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (!key || !*key) throw ConfigError("remote backend: environment variable " + config_.api_key_env + " is not set");
  api_key_ = key;
}

json RemoteBackend::request_body(std::string_view prompt, std::string_view input, double temperature) const {
  json body{{"model", config_.model_tag}, {"temperature", temperature}};
  if (config_.api_style == ApiStyle::chat) {
    json messages = json::array();
    if (!prompt.empty()) messages.push_back({{"role", "system"}, {"content", std::string(prompt)}});
    messages.push_back({{"role", "user"}, {"content", std::string(input)}});
    body["messages"] = std::move(messages);
  } else {
    std::string joined(prompt);
    if (!joined.empty() && !input.empty()) joined += "\n\n";
    joined += input;
    body["prompt"] = joined;
  }
  return body;
}

std::string RemoteBackend::parse_response(const std::string& body) const {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw BackendError(BackendError::Kind::transport, std::string("malformed response body: ") + e.what());
  }
  std::string content;
  if (auto c = j.find("choices"); c != j.end() && c->is_array() && !c->empty()) {
    const auto& first = c->front();
    if (auto m = first.find("message"); m != first.end() && m->contains("content") && (*m)["content"].is_string()) {
      content = (*m)["content"].get<std::string>();
    } else if (auto t = first.find("text"); t != first.end() && t->is_string()) {
      content = t->get<std::string>();
    }
  }
  if (text::trim(content).empty()) throw BackendError(BackendError::Kind::empty_completion, "empty completion");
  return content;
}

std::chrono::milliseconds RemoteBackend::backoff(int attempt) {
  double jitter = 0.0;
  {
    std::lock_guard lock(rng_mu_);
    std::mt19937_64 rng(rng_state_);
    rng_state_ = rng();
    jitter = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
  }
  const double base = static_cast<double>(config_.backoff_base.count()) * static_cast<double>(1u << std::min(attempt, 16));
  return std::chrono::milliseconds(static_cast<long long>(base * (1.0 + jitter)));
}

std::string RemoteBackend::complete(std::string_view prompt, std::string_view input, double temperature) {
  if (text::trim(prompt).empty() && text::trim(input).empty()) {
    throw BackendError(BackendError::Kind::empty_prompt, "empty prompt");
  }
  const std::string body = request_body(prompt, input, temperature).dump();
  const httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};

  BackendError last(BackendError::Kind::transport, "no attempt made");
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(backoff(attempt - 1));
    limiter_.acquire();
    in_flight_.acquire();
    httplib::Result res = [&] {
      httplib::Client client(origin_);
      const auto secs = config_.timeout.count() / 1000;
      const auto usecs = (config_.timeout.count() % 1000) * 1000;
      client.set_connection_timeout(secs, usecs);
      client.set_read_timeout(secs, usecs);
      client.set_write_timeout(secs, usecs);
      return client.Post(path_, headers, body, "application/json");
    }();
    in_flight_.release();

    if (!res) {
      last = BackendError(BackendError::Kind::transport, "transport failure: " + httplib::to_string(res.error()));
      continue;
    }
    const int status = res->status;
    if (status == 429) {
      last = BackendError(BackendError::Kind::rate_limited, "rate limited (HTTP 429)");
      continue;
    }
    if (status >= 500) {
      last = BackendError(BackendError::Kind::transport, "server error (HTTP " + std::to_string(status) + ")");
      continue;
    }
    if (status < 200 || status >= 300) {
      throw BackendError(BackendError::Kind::http_status, "HTTP " + std::to_string(status) + ": " + res->body);
    }
    return parse_response(res->body);
  }
  throw BackendError(last.kind(), std::string(last.what()) + " after " + std::to_string(config_.max_retries + 1) +
                                      " attempts");
}

}  // namespace prsa
