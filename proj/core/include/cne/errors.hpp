// Copyright 2026 The CNE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace cne {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// An operation produced or received a corpus with no conversations.
class EmptyCorpusError : public Error {
 public:
  explicit EmptyCorpusError(const std::string& message) : Error(message) {}
};

/// A value violated a documented invariant (probabilities, shapes, ranges).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error(message) {}
};

/// Unrecoverable parse failure; carries the offending raw text for dead-lettering.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string raw)
      : Error(message), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

/// Remote or stub provider failure. `retryable` distinguishes transport
/// faults from hard errors; `attempts` counts calls made before giving up.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& message, bool retryable, int attempts = 1)
      : Error(message), retryable_(retryable), attempts_(attempts) {}
  bool retryable() const { return retryable_; }
  int attempts() const { return attempts_; }

 private:
  bool retryable_;
  int attempts_;
};

/// Raised when a network call is requested while the pipeline runs --offline.
class OfflineError : public ProviderError {
 public:
  explicit OfflineError(const std::string& message)
      : ProviderError(message, /*retryable=*/false) {}
};

/// Cohen's kappa is undefined because expected agreement equals 1.
class DegenerateAgreementError : public Error {
 public:
  explicit DegenerateAgreementError(const std::string& message) : Error(message) {}
};

/// The explainer needs at least one edge to optimize a mask over.
class UnexplainableError : public Error {
 public:
  explicit UnexplainableError(const std::string& message) : Error(message) {}
};

/// Filesystem failure; message always names the path involved.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(message) {}
};

/// Config file rejected (unknown key, out-of-range value, wrong type).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(message) {}
};

/// Stage orchestration failure (missing prerequisite stage, lock conflict).
class PipelineError : public Error {
 public:
  explicit PipelineError(const std::string& message) : Error(message) {}
};

}  // namespace cne
