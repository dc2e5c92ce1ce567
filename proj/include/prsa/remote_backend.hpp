#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <semaphore>
#include <string>

#include "prsa/gateway.hpp"

namespace prsa {

/// Token bucket: `requests` tokens refill evenly over `interval`.
class RateLimiter {
 public:
  explicit RateLimiter(RateLimit limit);

  /// Blocks until a token is available.
  void acquire();

 private:
  using clock = std::chrono::steady_clock;

  void refill(clock::time_point now);

  double capacity_;
  double per_ms_;
  double tokens_;
  clock::time_point last_;
  std::mutex mu_;
};

/// HTTP JSON completion client (OpenAI-style chat or completion bodies).
class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(BackendConfig config);

  std::string complete(std::string_view prompt, std::string_view input, double temperature) override;

  /// Request body sent for (prompt, input, temperature); exposed for tests.
  json request_body(std::string_view prompt, std::string_view input, double temperature) const;

  /// Extracts the completion text from a response body.
  std::string parse_response(const std::string& body) const;

 private:
  std::chrono::milliseconds backoff(int attempt);

  std::string origin_;  // scheme://host[:port]
  std::string path_;
  std::string api_key_;
  RateLimiter limiter_;
  std::counting_semaphore<1024> in_flight_;
  std::mutex rng_mu_;
  std::uint64_t rng_state_;
};

}  // namespace prsa
