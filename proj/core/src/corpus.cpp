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

#include "cne/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <json.hpp>

#include "cne/errors.hpp"
#include "cne/io.hpp"

namespace cne {

using nlohmann::json;

std::string Conversation::full_text() const {
  std::string text = post_text;
  for (const auto& comment : comment_texts) {
    text += '\n';
    text += comment;
  }
  return text;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = true;  // leading whitespace dropped
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out += ' ';
      out += c;
      in_space = false;
    }
  }
  return out;
}

namespace {

Conversation conversation_from_json(const json& record) {
  if (!record.is_object()) throw ValidationError("record is not a JSON object");
  for (const char* field : {"id", "community", "post_text"}) {
    if (!record.contains(field)) throw ValidationError(std::string("missing field: ") + field);
    if (!record.at(field).is_string()) {
      throw ValidationError(std::string("field is not a string: ") + field);
    }
  }
  Conversation conv;
  conv.id = record.at("id").get<std::string>();
  conv.community = record.at("community").get<std::string>();
  conv.post_text = record.at("post_text").get<std::string>();
  if (conv.id.empty()) throw ValidationError("empty id");
  if (record.contains("comments")) {
    if (!record.at("comments").is_array()) throw ValidationError("comments is not an array");
    for (const auto& comment : record.at("comments")) {
      if (!comment.is_string()) throw ValidationError("comment is not a string");
      conv.comment_texts.push_back(comment.get<std::string>());
    }
    conv.comment_count = static_cast<int>(conv.comment_texts.size());
    if (record.contains("comment_count") &&
        record.at("comment_count").get<int>() != conv.comment_count) {
      throw ValidationError("comment_count does not match comments array length");
    }
  } else if (record.contains("comment_count")) {
    if (!record.at("comment_count").is_number_integer() ||
        record.at("comment_count").get<int>() < 0) {
      throw ValidationError("comment_count must be a non-negative integer");
    }
    conv.comment_count = record.at("comment_count").get<int>();
  }
  if (record.contains("created_at")) {
    if (!record.at("created_at").is_string()) throw ValidationError("created_at is not a string");
    conv.created_at = record.at("created_at").get<std::string>();
  }
  if (normalize_whitespace(conv.full_text()).empty()) {
    throw ValidationError("conversation text is empty after trimming");
  }
  return conv;
}

json conversation_to_json(const Conversation& conv) {
  json record;
  record["id"] = conv.id;
  record["community"] = conv.community;
  record["post_text"] = conv.post_text;
  record["comments"] = conv.comment_texts;
  record["comment_count"] = conv.comment_count;
  if (conv.created_at.has_value()) record["created_at"] = *conv.created_at;
  return record;
}

// Common abbreviations that end with '.' but do not end a sentence.
const std::set<std::string>& abbreviation_guard() {
  static const std::set<std::string> guard = {
      "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "ave.", "blvd.",
      "vs.", "etc.", "e.g.", "i.e.", "approx.", "dept.", "est.", "inc.", "no.", "u.s.",
  };
  return guard;
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_guarded_abbreviation(const std::string& text, std::size_t punct_pos) {
  // Walk back to the start of the token containing the '.' at punct_pos.
  std::size_t start = punct_pos;
  while (start > 0 && !std::isspace(static_cast<unsigned char>(text[start - 1]))) --start;
  const std::string token = lowercase(text.substr(start, punct_pos - start + 1));
  if (abbreviation_guard().count(token) > 0) return true;
  // Single-letter initials such as "J." in names.
  return token.size() == 2 && std::isalpha(static_cast<unsigned char>(token[0]));
}

}  // namespace

SentenceList segment_sentences(const Conversation& conversation) {
  const std::string text = conversation.full_text();
  if (normalize_whitespace(text).empty()) {
    throw ValidationError("segment_sentences: conversation " + conversation.id + " has no text");
  }

  SentenceList result;
  result.conversation_id = conversation.id;

  std::vector<std::size_t> breaks;  // index of first char after a break
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      breaks.push_back(i + 1);
      continue;
    }
    if (c != '.' && c != '!' && c != '?') continue;
    // Consume runs of terminal punctuation and trailing quotes/brackets.
    std::size_t end = i;
    while (end + 1 < text.size() &&
           (text[end + 1] == '.' || text[end + 1] == '!' || text[end + 1] == '?')) {
      ++end;
    }
    while (end + 1 < text.size() &&
           (text[end + 1] == '"' || text[end + 1] == '\'' || text[end + 1] == ')')) {
      ++end;
    }
    const bool at_end = end + 1 >= text.size();
    const bool before_space =
        !at_end && std::isspace(static_cast<unsigned char>(text[end + 1]));
    if ((at_end || before_space) && !(c == '.' && is_guarded_abbreviation(text, i))) {
      breaks.push_back(end + 1);
    }
    i = end;
  }

  std::size_t begin = 0;
  auto flush = [&](std::size_t stop) {
    std::size_t lo = begin;
    std::size_t hi = stop;
    while (lo < hi && std::isspace(static_cast<unsigned char>(text[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(text[hi - 1]))) --hi;
    if (hi > lo) result.sentences.push_back(text.substr(lo, hi - lo));
  };
  for (std::size_t stop : breaks) {
    flush(stop);
    begin = stop;
  }
  flush(text.size());

  if (result.sentences.empty()) {
    // Hard fallback: text with no terminal punctuation is one sentence.
    result.sentences.push_back(normalize_whitespace(text));
  }
  return result;
}

Corpus ingest_jsonl(const std::filesystem::path& path, const IngestOptions& options,
                    IngestReport* report) {
  const std::vector<std::string> lines = read_lines(path);
  IngestReport local;
  IngestReport& out = report != nullptr ? *report : local;

  Corpus corpus;
  corpus.label = "raw";
  std::set<std::string> seen_ids;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (normalize_whitespace(line).empty()) continue;
    try {
      const json record = json::parse(line);
      Conversation conv = conversation_from_json(record);
      if (seen_ids.count(conv.id) > 0) throw ValidationError("duplicate id: " + conv.id);
      if (conv.comment_count < options.min_comments) {
        ++out.dropped_min_comments;
        continue;
      }
      seen_ids.insert(conv.id);
      corpus.conversations.push_back(std::move(conv));
    } catch (const json::exception& e) {
      out.errors.push_back({i + 1, std::string("invalid JSON: ") + e.what()});
    } catch (const ValidationError& e) {
      out.errors.push_back({i + 1, e.what()});
    }
  }
  out.ingested = corpus.conversations.size();

  if (corpus.conversations.empty()) {
    throw EmptyCorpusError("ingest produced an empty corpus from " + path.string());
  }
  return corpus;
}

std::string IngestReport::to_json_string() const {
  json doc;
  doc["ingested"] = ingested;
  doc["dropped_min_comments"] = dropped_min_comments;
  doc["errors"] = json::array();
  for (const auto& err : errors) {
    doc["errors"].push_back({{"line", err.line}, {"reason", err.reason}});
  }
  return doc.dump(2) + "\n";
}

std::string corpus_to_json_string(const Corpus& corpus) {
  json doc;
  doc["label"] = corpus.label;
  if (corpus.hypothesis.has_value()) doc["hypothesis"] = *corpus.hypothesis;
  doc["conversations"] = json::array();
  for (const auto& conv : corpus.conversations) {
    doc["conversations"].push_back(conversation_to_json(conv));
  }
  return doc.dump(2) + "\n";
}

Corpus corpus_from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("corpus JSON parse failure: ") + e.what(), text);
  }
  Corpus corpus;
  corpus.label = doc.value("label", std::string("raw"));
  if (doc.contains("hypothesis")) corpus.hypothesis = doc.at("hypothesis").get<std::string>();
  std::set<std::string> seen_ids;
  for (const auto& record : doc.at("conversations")) {
    Conversation conv = conversation_from_json(record);
    if (!seen_ids.insert(conv.id).second) {
      throw ValidationError("corpus JSON contains duplicate id: " + conv.id);
    }
    corpus.conversations.push_back(std::move(conv));
  }
  return corpus;
}

}  // namespace cne
