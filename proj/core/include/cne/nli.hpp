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

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cne/corpus.hpp"
#include "cne/retry.hpp"

namespace cne {

enum class NliLabel { Entailment, Contradiction, Neutral };

std::string_view display(NliLabel label);

struct NliScores {
  double ent = 0.0;
  double con = 0.0;
  double neu = 0.0;
};

struct NliJudgment {
  NliLabel label = NliLabel::Neutral;
  NliScores scores;

  /// Validates the probabilities (each in [0,1], summing to 1 within 1e-6)
  /// and derives the label as argmax with the fixed tie order ent > con > neu.
  static NliJudgment from_scores(const NliScores& scores);
};

struct Hypothesis {
  std::string text;

  explicit Hypothesis(std::string t);
  static Hypothesis default_hypothesis() { return Hypothesis("Community needs are important"); }
};

struct EntailmentReport {
  std::string conversation_id;
  std::size_t sentence_count = 0;
  std::size_t entail_count = 0;

  double ratio() const {
    return static_cast<double>(entail_count) / static_cast<double>(sentence_count);
  }
};

class NliProvider {
 public:
  virtual ~NliProvider() = default;
  virtual std::string id() const = 0;
  virtual bool remote() const { return false; }
  virtual NliJudgment judge(std::string_view premise, const Hypothesis& hypothesis) = 0;
};

/// Deterministic table-backed provider for tests and offline fixtures.
/// Script format: {"judgments": {"<premise>": [ent, con, neu]}, "default": [...]}.
class StubNliProvider : public NliProvider {
 public:
  StubNliProvider(std::string id, const std::string& script_json);
  static StubNliProvider from_file(std::string id, const std::filesystem::path& path);

  std::string id() const override { return id_; }
  NliJudgment judge(std::string_view premise, const Hypothesis& hypothesis) override;
  std::size_t call_count() const { return calls_; }

 private:
  struct Impl;
  std::string id_;
  std::shared_ptr<Impl> impl_;
  std::size_t calls_ = 0;
};

struct HttpProviderOptions {
  std::string endpoint;          // e.g. http://host:port/nli
  std::string api_key_env;       // name of the env var holding the key, may be empty
  RetryPolicy retry;
  double rate_capacity = 4.0;    // token bucket size
  double rate_per_second = 4.0;  // refill rate
};

/// Remote NLI endpoint: POST {premise, hypothesis} -> {ent, con, neu}.
std::unique_ptr<NliProvider> make_http_nli_provider(std::string id, HttpProviderOptions options);

/// Cache wrapper. Entries are one JSON file per request hash with
/// {premise, hypothesis, scores, provider, timestamp}. When `offline` is set,
/// a cache miss on a remote inner provider raises OfflineError instead of
/// touching the network.
class CachedNliProvider : public NliProvider {
 public:
  CachedNliProvider(std::shared_ptr<NliProvider> inner, std::filesystem::path cache_dir,
                    bool offline = false);

  std::string id() const override;
  bool remote() const override;
  NliJudgment judge(std::string_view premise, const Hypothesis& hypothesis) override;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

/// Fraction of a conversation's sentences judged to entail the hypothesis.
/// Premises are whitespace-normalized sentence texts.
EntailmentReport entailment_ratio(const Conversation& conversation, const Hypothesis& hypothesis,
                                  NliProvider& provider);

/// Keep exactly the conversations whose entailment ratio is strictly greater
/// than `threshold`. Per-conversation reports are appended to `reports` when
/// provided. Raises EmptyCorpusError when nothing survives.
Corpus filter_corpus(const Corpus& corpus, const Hypothesis& hypothesis, double threshold,
                     NliProvider& provider, std::vector<EntailmentReport>* reports = nullptr);

std::string entailment_reports_to_json_string(const std::vector<EntailmentReport>& reports);

}  // namespace cne
