#pragma once

#include <stdexcept>
#include <string>

namespace searchlab {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument to an operation (bad k, length mismatch, ...).
struct ParameterError : Error {
  using Error::Error;
};

// Problem size exceeds an exhaustive-analysis bound.
struct CapacityError : Error {
  using Error::Error;
};

// Malformed serialized data (landscape files, configs, stores, CSVs).
struct FormatError : Error {
  using Error::Error;
};

// Game protocol violation (submission after the final trial, ...).
struct ProtocolError : Error {
  using Error::Error;
};

// Operation applied to an object in the wrong state (incomplete run, ...).
struct StateError : Error {
  using Error::Error;
};

// LLM transport failure after exhausting the retry policy.
struct ProviderError : Error {
  using Error::Error;
};

// Transcript no longer fits the provider's context window.
struct ContextOverflowError : ProviderError {
  using ProviderError::ProviderError;
};

// Missing or unusable configuration (credentials, unknown labels, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Model output that does not contain a recognizable answer.
struct ParseError : Error {
  ParseError(const std::string& msg, std::string span)
      : Error(msg), offending_span(std::move(span)) {}
  std::string offending_span;
};

// Classifier reply that does not follow the rubric's output format.
struct ClassifierFormatError : Error {
  using Error::Error;
};

// Rank-deficient or otherwise singular design matrix.
struct RankError : Error {
  using Error::Error;
};

// Run store contents violate a structural invariant.
struct IntegrityError : Error {
  using Error::Error;
};

}  // namespace searchlab
