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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cne/gnn.hpp"
#include "cne/retry.hpp"

namespace cne {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct ProviderSpec {
  std::string id;
  std::string kind;  // "stub" | "http" | "hash" (embedding only)
  std::string model;
  std::filesystem::path script;  // stub script path
  std::string endpoint;
  std::string api_key_env;
  std::size_t dimension = 64;    // embedding only
  std::size_t max_tokens = 256;  // embedding only
};

/// Parsed, validated configuration. Unknown keys are rejected so typos in
/// hyperparameters fail loudly instead of silently using defaults.
struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path workdir;
  std::filesystem::path cache_dir;

  std::string hypothesis = "Community needs are important";
  double threshold = 0.5;
  int min_comments = 5;

  ProviderSpec nli_provider;
  std::vector<ProviderSpec> llm_providers;
  ProviderSpec embedding_provider;

  double annotator_temperature = 0.1;
  std::size_t truncate_chars = 8000;
  RetryPolicy retry;
  std::vector<std::string> annotation_kinds = {"classify_need", "classify_cna"};

  std::string kg_provider_id;  // defaults to first llm provider

  TrainConfig training;
  std::vector<std::uint64_t> seeds = {0};
  std::string training_provider_id;  // defaults to first llm provider
  bool per_community = true;

  ExplainerConfig explainer;

  int report_top_explanations = 5;
  bool report_exclude_e8 = false;

  std::vector<std::string> agreement_providers;  // defaults to first two llm providers
  std::optional<std::filesystem::path> sentiment_file;
  std::optional<std::filesystem::path> entity_counts_file;

  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig from_json_string(const std::string& text,
                                         const std::filesystem::path& base_dir);
};

struct PipelineOptions {
  bool offline = false;
  std::optional<std::string> community;
  std::optional<std::string> provider;
  std::optional<std::uint64_t> seed;
};

struct StageOutcome {
  std::string stage;
  bool skipped = false;
  std::vector<std::filesystem::path> outputs;
};

/// Exclusive ownership of a workdir while a pipeline command runs.
class WorkdirLock {
 public:
  explicit WorkdirLock(const std::filesystem::path& workdir);
  ~WorkdirLock();
  WorkdirLock(const WorkdirLock&) = delete;
  WorkdirLock& operator=(const WorkdirLock&) = delete;

 private:
  std::filesystem::path lock_path_;
};

/// Stage orchestration. Every stage writes its outputs plus a manifest of
/// input/output content hashes; a stage re-runs iff any input hash changed.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, PipelineOptions options = {});

  StageOutcome run_ingest();
  StageOutcome run_filter();
  StageOutcome run_annotate();
  StageOutcome run_build_kg();
  StageOutcome run_featurize();
  StageOutcome run_train();
  StageOutcome run_explain();
  StageOutcome run_agreement();
  StageOutcome run_report();
  std::vector<StageOutcome> run_all();

  const PipelineConfig& config() const { return config_; }

 private:
  struct StagePlan;
  StageOutcome execute(const StagePlan& plan);

  PipelineConfig config_;
  PipelineOptions options_;
};

}  // namespace cne
