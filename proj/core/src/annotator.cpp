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

#include "cne/annotator.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "cne/cache.hpp"
#include "cne/errors.hpp"
#include "cne/hashing.hpp"
#include "cne/io.hpp"
#include "cne/retry.hpp"

namespace cne {

using nlohmann::json;

namespace {

void check_temperature(double temperature) {
  if (!(temperature >= 0.0 && temperature <= 1.0)) {
    throw ValidationError("temperature must lie in [0,1], got " + std::to_string(temperature));
  }
}

std::string parse_for_kind(PromptKind kind, const std::string& raw, bool* unparsed) {
  *unparsed = false;
  switch (kind) {
    case PromptKind::ClassifyNeed: {
      const auto parsed = parse_need_label(raw);
      *unparsed = parsed.unparsed;
      return std::string(display(parsed.label));
    }
    case PromptKind::ClassifyCna: {
      const auto parsed = parse_cna_label(raw);
      *unparsed = parsed.unparsed;
      return std::string(display(parsed.label));
    }
    case PromptKind::CategorizeNeed: {
      const auto parsed = parse_need_category(raw);
      *unparsed = parsed.unparsed;
      return std::string(display(parsed.label));
    }
    case PromptKind::CategorizeAsset: {
      const auto parsed = parse_asset_category(raw);
      *unparsed = parsed.unparsed;
      return std::string(display(parsed.label));
    }
    case PromptKind::BuildKg:
      // Raw response is the payload; kg_builder parses it downstream.
      return "";
  }
  throw ValidationError("unknown prompt kind");
}

}  // namespace

struct StubLlmProvider::Impl {
  struct Entry {
    std::string hash;
    std::vector<std::string> contains_all;
    std::string response;
    int fail_times = 0;
    int failures_injected = 0;
  };
  std::vector<Entry> entries;
  std::optional<std::string> fallback;
  std::size_t calls = 0;
};

StubLlmProvider::StubLlmProvider(std::string id, const std::string& script_json, std::string model)
    : id_(std::move(id)), model_(std::move(model)), impl_(std::make_shared<Impl>()) {
  json doc;
  try {
    doc = json::parse(script_json);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("llm stub script is not valid JSON: ") + e.what());
  }
  if (doc.contains("entries")) {
    for (const auto& item : doc.at("entries")) {
      Impl::Entry entry;
      if (item.contains("hash")) entry.hash = item.at("hash").get<std::string>();
      if (item.contains("contains_all")) {
        for (const auto& needle : item.at("contains_all")) {
          entry.contains_all.push_back(needle.get<std::string>());
        }
      }
      entry.response = item.at("response").get<std::string>();
      entry.fail_times = item.value("fail_times", 0);
      impl_->entries.push_back(std::move(entry));
    }
  }
  if (doc.contains("default")) impl_->fallback = doc.at("default").get<std::string>();
}

StubLlmProvider StubLlmProvider::from_file(std::string id, const std::filesystem::path& path,
                                           std::string model) {
  return StubLlmProvider(std::move(id), read_text_file(path), std::move(model));
}

std::string StubLlmProvider::complete(const std::string& prompt, double temperature) {
  check_temperature(temperature);
  ++impl_->calls;
  const std::string prompt_hash = content_hash(prompt);
  for (auto& entry : impl_->entries) {
    const bool hash_hit = !entry.hash.empty() && entry.hash == prompt_hash;
    const bool contains_hit =
        !entry.contains_all.empty() &&
        std::all_of(entry.contains_all.begin(), entry.contains_all.end(),
                    [&prompt](const std::string& needle) {
                      return prompt.find(needle) != std::string::npos;
                    });
    if (!hash_hit && !contains_hit) continue;
    if (entry.failures_injected < entry.fail_times) {
      ++entry.failures_injected;
      throw ProviderError("llm stub scripted failure (" +
                              std::to_string(entry.failures_injected) + "/" +
                              std::to_string(entry.fail_times) + ")",
                          /*retryable=*/true);
    }
    return entry.response;
  }
  if (impl_->fallback.has_value()) return *impl_->fallback;
  throw ProviderError("llm stub has no entry for prompt hash " + prompt_hash,
                      /*retryable=*/false);
}

std::size_t StubLlmProvider::call_count() const { return impl_->calls; }

struct CachedLlmProvider::Impl {
  std::shared_ptr<LlmProvider> inner;
  JsonFileCache cache;
  RetryPolicy retry;
  bool offline = false;

  Impl(std::shared_ptr<LlmProvider> p, std::filesystem::path dir, RetryPolicy r, bool off)
      : inner(std::move(p)), cache(std::move(dir)), retry(r), offline(off) {}
};

CachedLlmProvider::CachedLlmProvider(std::shared_ptr<LlmProvider> inner,
                                     std::filesystem::path cache_dir, RetryPolicy retry,
                                     bool offline)
    : impl_(std::make_shared<Impl>(std::move(inner), std::move(cache_dir), retry, offline)) {}

std::string CachedLlmProvider::id() const { return impl_->inner->id(); }
std::string CachedLlmProvider::model() const { return impl_->inner->model(); }
bool CachedLlmProvider::remote() const { return impl_->inner->remote(); }

std::string CachedLlmProvider::complete(const std::string& prompt, double temperature) {
  check_temperature(temperature);
  char temp_buf[32];
  std::snprintf(temp_buf, sizeof(temp_buf), "%.6f", temperature);
  const std::string key_material = "llm\x1f" + impl_->inner->id() + "\x1f" +
                                   impl_->inner->model() + "\x1f" + temp_buf + "\x1f" + prompt;
  const std::string key = content_hash(key_material);
  if (const auto entry = impl_->cache.get(key)) {
    return json::parse(*entry).at("response").get<std::string>();
  }
  if (impl_->offline && impl_->inner->remote()) {
    throw OfflineError("llm cache miss for remote provider " + impl_->inner->id() +
                       " while offline");
  }
  const std::string response = with_retries(
      impl_->retry, [&](int) { return impl_->inner->complete(prompt, temperature); });
  json doc;
  doc["provider"] = impl_->inner->id();
  doc["model"] = impl_->inner->model();
  doc["temperature"] = temperature;
  doc["prompt"] = prompt;
  doc["response"] = response;
  doc["timestamp"] = utc_timestamp_now();
  impl_->cache.put(key, doc.dump(2) + "\n");
  return response;
}

AnnotateResult annotate_corpus(const Corpus& corpus, const std::vector<LlmProvider*>& providers,
                               PromptKind kind, const AnnotateOptions& options) {
  if (providers.empty()) throw ValidationError("annotate_corpus: no providers");
  if (corpus.empty()) throw EmptyCorpusError("annotate_corpus: empty corpus");
  check_temperature(options.temperature);

  AnnotateResult result;
  const std::size_t total_tasks = corpus.size() * providers.size();
  const std::string template_hash = prompt_template_hash(kind);

  for (const auto& conversation : corpus.conversations) {
    bool truncated = false;
    const std::string prompt =
        render_prompt(kind, conversation, options.truncate_chars, &truncated);
    if (truncated) result.truncated_ids.push_back(conversation.id);
    const std::string prompt_hash = content_hash(prompt);

    for (LlmProvider* provider : providers) {
      try {
        const std::string response = provider->complete(prompt, options.temperature);
        Annotation annotation;
        annotation.conversation_id = conversation.id;
        annotation.provider_id = provider->id();
        annotation.kind = kind;
        annotation.raw_response = response;
        annotation.temperature = options.temperature;
        annotation.prompt_hash = prompt_hash;
        annotation.template_hash = template_hash;
        annotation.label = parse_for_kind(kind, response, &annotation.unparsed);
        result.annotations.push_back(std::move(annotation));
      } catch (const ProviderError& e) {
        result.failures.push_back({conversation.id, provider->id(), e.what()});
        if (static_cast<double>(result.failures.size()) >
            options.abort_failure_fraction * static_cast<double>(total_tasks)) {
          result.aborted = true;
          std::sort(result.annotations.begin(), result.annotations.end(),
                    [](const Annotation& a, const Annotation& b) {
                      return std::tie(a.conversation_id, a.provider_id) <
                             std::tie(b.conversation_id, b.provider_id);
                    });
          return result;
        }
      }
    }
  }

  std::sort(result.annotations.begin(), result.annotations.end(),
            [](const Annotation& a, const Annotation& b) {
              return std::tie(a.conversation_id, a.provider_id) <
                     std::tie(b.conversation_id, b.provider_id);
            });
  return result;
}

double temperature_sweep(const Corpus& sample, LlmProvider& provider, PromptKind kind,
                         const std::map<std::string, NeedLabel>& dev_labels,
                         const AnnotateOptions& options) {
  if (sample.empty()) throw ValidationError("temperature_sweep: empty sample");
  if (dev_labels.empty()) throw ValidationError("temperature_sweep: no dev labels");

  double best_temperature = 0.0;
  double best_score = -1.0;
  for (int step = 0; step <= 10; ++step) {
    const double temperature = static_cast<double>(step) / 10.0;
    AnnotateOptions point = options;
    point.temperature = temperature;
    std::vector<LlmProvider*> providers = {&provider};
    const AnnotateResult result = annotate_corpus(sample, providers, kind, point);

    // Macro-averaged per-label recall over the labels present in dev data.
    std::map<NeedLabel, std::pair<int, int>> hits;  // label -> (correct, total)
    for (const auto& annotation : result.annotations) {
      const auto dev = dev_labels.find(annotation.conversation_id);
      if (dev == dev_labels.end()) continue;
      auto& [correct, total] = hits[dev->second];
      ++total;
      if (annotation.label == display(dev->second)) ++correct;
    }
    double score = 0.0;
    if (!hits.empty()) {
      for (const auto& [label, pair] : hits) {
        score += static_cast<double>(pair.first) / static_cast<double>(pair.second);
      }
      score /= static_cast<double>(hits.size());
    }
    if (score > best_score) {  // strict: ties keep the lowest temperature
      best_score = score;
      best_temperature = temperature;
    }
  }
  return best_temperature;
}

std::string annotations_to_jsonl(const std::vector<Annotation>& annotations) {
  std::ostringstream out;
  for (const auto& annotation : annotations) {
    json record;
    record["conversation_id"] = annotation.conversation_id;
    record["provider_id"] = annotation.provider_id;
    record["kind"] = std::string(prompt_kind_name(annotation.kind));
    record["label"] = annotation.label;
    record["raw_response"] = annotation.raw_response;
    record["temperature"] = annotation.temperature;
    record["prompt_hash"] = annotation.prompt_hash;
    record["template_hash"] = annotation.template_hash;
    record["unparsed"] = annotation.unparsed;
    out << record.dump() << "\n";
  }
  return out.str();
}

std::vector<Annotation> annotations_from_jsonl(const std::string& text) {
  std::vector<Annotation> annotations;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_whitespace(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("annotations JSONL line " + std::to_string(line_no) + ": " + e.what(), line);
    }
    Annotation annotation;
    annotation.conversation_id = record.at("conversation_id").get<std::string>();
    annotation.provider_id = record.at("provider_id").get<std::string>();
    annotation.kind = prompt_kind_from_name(record.value("kind", "classify_need"));
    annotation.label = record.at("label").get<std::string>();
    annotation.raw_response = record.at("raw_response").get<std::string>();
    annotation.temperature = record.at("temperature").get<double>();
    annotation.prompt_hash = record.at("prompt_hash").get<std::string>();
    annotation.template_hash = record.value("template_hash", "");
    annotation.unparsed = record.at("unparsed").get<bool>();
    annotations.push_back(std::move(annotation));
  }
  return annotations;
}

}  // namespace cne
