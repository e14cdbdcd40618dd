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
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cne/corpus.hpp"
#include "cne/labels.hpp"
#include "cne/nli.hpp"  // HttpProviderOptions, RetryPolicy
#include "cne/prompts.hpp"

namespace cne {

/// One labeling decision, with the verbatim model response kept for audit.
struct Annotation {
  std::string conversation_id;
  std::string provider_id;
  PromptKind kind = PromptKind::ClassifyNeed;
  std::string label;         // canonical display string; empty for build_kg
  std::string raw_response;  // verbatim provider output
  double temperature = 0.1;
  std::string prompt_hash;    // hash of the rendered prompt
  std::string template_hash;  // hash of the template resource
  bool unparsed = false;
};

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  virtual std::string id() const = 0;
  virtual std::string model() const { return "default"; }
  virtual bool remote() const { return false; }
  virtual std::string complete(const std::string& prompt, double temperature) = 0;
};

/// Scripted provider for tests and offline fixtures. Entries are matched in
/// file order: {"hash": "<prompt hash>"} or {"contains_all": ["...", ...]},
/// each with a "response" and an optional "fail_times" that injects that many
/// retryable failures before succeeding. A "default" response may be given.
class StubLlmProvider : public LlmProvider {
 public:
  StubLlmProvider(std::string id, const std::string& script_json, std::string model = "stub");
  static StubLlmProvider from_file(std::string id, const std::filesystem::path& path,
                                   std::string model = "stub");

  std::string id() const override { return id_; }
  std::string model() const override { return model_; }
  std::string complete(const std::string& prompt, double temperature) override;
  std::size_t call_count() const;

 private:
  struct Impl;
  std::string id_;
  std::string model_;
  std::shared_ptr<Impl> impl_;
};

/// Remote completion endpoint: POST {model, prompt, temperature} -> {text}.
std::unique_ptr<LlmProvider> make_http_llm_provider(std::string id, std::string model,
                                                    HttpProviderOptions options);

/// Standard wrapper applied to every provider in the pipeline: caches by
/// hash(provider id, model, temperature, prompt), retries retryable failures
/// with exponential backoff, and enforces --offline for remote providers.
class CachedLlmProvider : public LlmProvider {
 public:
  CachedLlmProvider(std::shared_ptr<LlmProvider> inner, std::filesystem::path cache_dir,
                    RetryPolicy retry = {}, bool offline = false);

  std::string id() const override;
  std::string model() const override;
  bool remote() const override;
  std::string complete(const std::string& prompt, double temperature) override;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

struct AnnotateOptions {
  double temperature = 0.1;
  std::size_t truncate_chars = 0;  // 0 = no cap
  double abort_failure_fraction = 0.5;
};

struct AnnotateFailure {
  std::string conversation_id;
  std::string provider_id;
  std::string reason;
};

struct AnnotateResult {
  std::vector<Annotation> annotations;  // sorted by (conversation_id, provider_id)
  std::vector<AnnotateFailure> failures;
  std::vector<std::string> truncated_ids;
  bool aborted = false;
};

/// One annotation per (conversation, provider). Per-item failures are
/// recorded without stopping the batch; the batch aborts once more than
/// `abort_failure_fraction` of all items have failed hard.
AnnotateResult annotate_corpus(const Corpus& corpus, const std::vector<LlmProvider*>& providers,
                               PromptKind kind, const AnnotateOptions& options = {});

/// Grid search 0.0..1.0 step 0.1 maximizing macro-averaged per-label recall
/// against dev labels; ties resolve to the lowest temperature.
double temperature_sweep(const Corpus& sample, LlmProvider& provider, PromptKind kind,
                         const std::map<std::string, NeedLabel>& dev_labels,
                         const AnnotateOptions& options = {});

std::string annotations_to_jsonl(const std::vector<Annotation>& annotations);
std::vector<Annotation> annotations_from_jsonl(const std::string& text);

}  // namespace cne
