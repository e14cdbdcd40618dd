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

#include "cne/nli.hpp"

#include <cmath>
#include <map>
#include <optional>

#include <json.hpp>

#include "cne/cache.hpp"
#include "cne/errors.hpp"
#include "cne/hashing.hpp"
#include "cne/io.hpp"

namespace cne {

using nlohmann::json;

std::string_view display(NliLabel label) {
  switch (label) {
    case NliLabel::Entailment: return "ent";
    case NliLabel::Contradiction: return "con";
    case NliLabel::Neutral: return "neu";
  }
  return "neu";
}

NliJudgment NliJudgment::from_scores(const NliScores& scores) {
  for (double s : {scores.ent, scores.con, scores.neu}) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw ValidationError("nli scores must lie in [0,1]");
    }
  }
  const double sum = scores.ent + scores.con + scores.neu;
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ValidationError("nli scores must sum to 1 (got " + std::to_string(sum) + ")");
  }
  NliJudgment judgment;
  judgment.scores = scores;
  // Fixed tie order: ent beats con beats neu.
  if (scores.ent >= scores.con && scores.ent >= scores.neu) {
    judgment.label = NliLabel::Entailment;
  } else if (scores.con >= scores.neu) {
    judgment.label = NliLabel::Contradiction;
  } else {
    judgment.label = NliLabel::Neutral;
  }
  return judgment;
}

Hypothesis::Hypothesis(std::string t) : text(std::move(t)) {
  if (normalize_whitespace(text).empty()) throw ValidationError("hypothesis text is empty");
}

struct StubNliProvider::Impl {
  std::map<std::string, NliScores, std::less<>> judgments;
  std::optional<NliScores> fallback;
};

namespace {

NliScores scores_from_json_array(const json& arr) {
  if (!arr.is_array() || arr.size() != 3) {
    throw ValidationError("nli stub scores must be a 3-element array");
  }
  return NliScores{arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
}

}  // namespace

StubNliProvider::StubNliProvider(std::string id, const std::string& script_json)
    : id_(std::move(id)), impl_(std::make_shared<Impl>()) {
  json doc;
  try {
    doc = json::parse(script_json);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("nli stub script is not valid JSON: ") + e.what());
  }
  if (doc.contains("judgments")) {
    for (const auto& [premise, scores] : doc.at("judgments").items()) {
      impl_->judgments[premise] = scores_from_json_array(scores);
    }
  }
  if (doc.contains("default")) {
    impl_->fallback = scores_from_json_array(doc.at("default"));
  }
}

StubNliProvider StubNliProvider::from_file(std::string id, const std::filesystem::path& path) {
  return StubNliProvider(std::move(id), read_text_file(path));
}

NliJudgment StubNliProvider::judge(std::string_view premise, const Hypothesis& hypothesis) {
  (void)hypothesis;
  ++calls_;
  const auto it = impl_->judgments.find(premise);
  if (it != impl_->judgments.end()) return NliJudgment::from_scores(it->second);
  if (impl_->fallback.has_value()) return NliJudgment::from_scores(*impl_->fallback);
  throw ProviderError("nli stub has no entry for premise: " + std::string(premise),
                      /*retryable=*/false);
}

struct CachedNliProvider::Impl {
  std::shared_ptr<NliProvider> inner;
  JsonFileCache cache;
  bool offline = false;

  Impl(std::shared_ptr<NliProvider> p, std::filesystem::path dir, bool off)
      : inner(std::move(p)), cache(std::move(dir)), offline(off) {}
};

CachedNliProvider::CachedNliProvider(std::shared_ptr<NliProvider> inner,
                                     std::filesystem::path cache_dir, bool offline)
    : impl_(std::make_shared<Impl>(std::move(inner), std::move(cache_dir), offline)) {}

std::string CachedNliProvider::id() const { return impl_->inner->id(); }

bool CachedNliProvider::remote() const { return impl_->inner->remote(); }

NliJudgment CachedNliProvider::judge(std::string_view premise, const Hypothesis& hypothesis) {
  const std::string key_material = "nli\x1f" + impl_->inner->id() + "\x1f" +
                                   std::string(premise) + "\x1f" + hypothesis.text;
  const std::string key = content_hash(key_material);
  if (const auto entry = impl_->cache.get(key)) {
    const json doc = json::parse(*entry);
    return NliJudgment::from_scores(NliScores{doc.at("scores").at("ent").get<double>(),
                                              doc.at("scores").at("con").get<double>(),
                                              doc.at("scores").at("neu").get<double>()});
  }
  if (impl_->offline && impl_->inner->remote()) {
    throw OfflineError("nli cache miss for remote provider " + impl_->inner->id() +
                       " while offline");
  }
  const NliJudgment judgment = impl_->inner->judge(premise, hypothesis);
  json doc;
  doc["premise"] = std::string(premise);
  doc["hypothesis"] = hypothesis.text;
  doc["scores"] = {{"ent", judgment.scores.ent},
                   {"con", judgment.scores.con},
                   {"neu", judgment.scores.neu}};
  doc["provider"] = impl_->inner->id();
  doc["timestamp"] = utc_timestamp_now();
  impl_->cache.put(key, doc.dump(2) + "\n");
  return judgment;
}

EntailmentReport entailment_ratio(const Conversation& conversation, const Hypothesis& hypothesis,
                                  NliProvider& provider) {
  const SentenceList sentences = segment_sentences(conversation);
  EntailmentReport report;
  report.conversation_id = conversation.id;
  report.sentence_count = sentences.sentences.size();
  for (const auto& sentence : sentences.sentences) {
    const std::string premise = normalize_whitespace(sentence);
    try {
      const NliJudgment judgment = provider.judge(premise, hypothesis);
      if (judgment.label == NliLabel::Entailment) ++report.entail_count;
    } catch (const ProviderError& e) {
      throw ProviderError("conversation " + conversation.id + ": " + e.what(), e.retryable(),
                          e.attempts());
    }
  }
  return report;
}

Corpus filter_corpus(const Corpus& corpus, const Hypothesis& hypothesis, double threshold,
                     NliProvider& provider, std::vector<EntailmentReport>* reports) {
  if (corpus.empty()) throw EmptyCorpusError("filter_corpus: input corpus is empty");

  Corpus filtered;
  filtered.label = "filtered";
  filtered.hypothesis = hypothesis.text;
  for (const auto& conversation : corpus.conversations) {
    const EntailmentReport report = entailment_ratio(conversation, hypothesis, provider);
    if (reports != nullptr) reports->push_back(report);
    // Strict comparison: a ratio exactly equal to the threshold is excluded.
    if (static_cast<double>(report.entail_count) >
        threshold * static_cast<double>(report.sentence_count)) {
      filtered.conversations.push_back(conversation);
    }
  }
  if (filtered.empty()) {
    throw EmptyCorpusError("filter_corpus: no conversation exceeded entailment ratio " +
                           std::to_string(threshold) + " (hypothesis/corpus mismatch?)");
  }
  return filtered;
}

std::string entailment_reports_to_json_string(const std::vector<EntailmentReport>& reports) {
  json doc = json::array();
  for (const auto& report : reports) {
    doc.push_back({{"conversation_id", report.conversation_id},
                   {"sentence_count", report.sentence_count},
                   {"entail_count", report.entail_count},
                   {"ratio", report.ratio()}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace cne
