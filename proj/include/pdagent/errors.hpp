#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pdagent {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(std::string message) : std::runtime_error(std::move(message)) {}
};

/// Bad or missing run/experiment configuration. CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A domain invariant or precondition was violated. CLI exit code 4.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Provider-side failure (HTTP status, empty body, missing fixture). CLI exit code 3.
class ProviderError : public Error {
public:
    ProviderError(std::string message, int status = 0, std::string body = {})
        : Error(std::move(message)), status_(status), body_(std::move(body)) {}

    int status() const noexcept { return status_; }
    const std::string& body() const noexcept { return body_; }

private:
    int status_;
    std::string body_;
};

/// Transport-level failure (connection refused, DNS, reset). Retryable.
class NetworkError : public ProviderError {
public:
    explicit NetworkError(std::string message) : ProviderError(std::move(message)) {}
};

/// Request exceeded its deadline. Retryable.
class TimeoutError : public ProviderError {
public:
    explicit TimeoutError(std::string message) : ProviderError(std::move(message)) {}
};

/// Scripted provider has no recorded response for the requested message list.
class MissingFixtureError : public ProviderError {
public:
    explicit MissingFixtureError(std::string message) : ProviderError(std::move(message)) {}
};

/// The model reply could not be parsed at the document level. CLI exit code 4.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A pipeline stage failed; carries the stage name for diagnostics and exit codes.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message, int exit_code)
        : Error("stage '" + stage + "' failed: " + message),
          stage_(std::move(stage)),
          exit_code_(exit_code) {}

    const std::string& stage() const noexcept { return stage_; }
    int exit_code() const noexcept { return exit_code_; }

private:
    std::string stage_;
    int exit_code_;
};

}  // namespace pdagent
