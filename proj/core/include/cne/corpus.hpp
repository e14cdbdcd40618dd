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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cne {

/// One post plus its comments; the unit every downstream stage consumes.
struct Conversation {
  std::string id;
  std::string community;
  std::string post_text;
  std::vector<std::string> comment_texts;
  std::optional<std::string> created_at;  // ISO-8601 UTC when present
  int comment_count = 0;

  /// Post and comments joined with newlines; classification sees all of it.
  std::string full_text() const;
};

struct Corpus {
  std::vector<Conversation> conversations;
  std::string label;  // stage tag: "raw" | "filtered"
  std::optional<std::string> hypothesis;

  bool empty() const { return conversations.empty(); }
  std::size_t size() const { return conversations.size(); }
};

struct SentenceList {
  std::string conversation_id;
  std::vector<std::string> sentences;
};

struct IngestRecordError {
  std::size_t line = 0;  // 1-based line number in the input file
  std::string reason;
};

struct IngestReport {
  std::size_t ingested = 0;
  std::size_t dropped_min_comments = 0;
  std::vector<IngestRecordError> errors;

  std::string to_json_string() const;
};

struct IngestOptions {
  int min_comments = 5;
};

/// Read a JSONL export, one conversation per line. Malformed records are
/// collected into the report, never silently skipped; an empty result is an
/// EmptyCorpusError.
Corpus ingest_jsonl(const std::filesystem::path& path, const IngestOptions& options,
                    IngestReport* report);

/// Deterministic rule-based sentence splitter: sentence-final punctuation
/// followed by whitespace, with an abbreviation guard; text without terminal
/// punctuation comes back as a single sentence.
SentenceList segment_sentences(const Conversation& conversation);

/// Collapse whitespace runs to single spaces and trim both ends.
std::string normalize_whitespace(std::string_view text);

std::string corpus_to_json_string(const Corpus& corpus);
Corpus corpus_from_json_string(const std::string& text);

}  // namespace cne
