#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace prsa {

/// Root of every error the toolkit throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  DatasetError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failures talking to an LLM service, mock or remote.
class BackendError : public Error {
 public:
  enum class Kind { transport, rate_limited, empty_completion, empty_prompt, http_status };

  BackendError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }
  bool is_transport() const noexcept {
    return kind_ == Kind::transport || kind_ == Kind::rate_limited || kind_ == Kind::http_status;
  }

 private:
  Kind kind_;
};

class DegenerateSurrogateError : public Error {
 public:
  using Error::Error;
};

class AnalyzerFormatError : public Error {
 public:
  using Error::Error;
};

class AttentionMissingError : public Error {
 public:
  using Error::Error;
};

class DegenerateTargetsError : public Error {
 public:
  using Error::Error;
};

}  // namespace prsa
