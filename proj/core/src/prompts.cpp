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

#include "cne/prompts.hpp"

#include "cne/errors.hpp"
#include "cne/hashing.hpp"

namespace cne {

namespace {

// Embedded copies of core/resources/prompts/*.txt, byte for byte.
// tests/annotator_test.cpp asserts the equality; edit the resource file and
// this literal together.

constexpr std::string_view kClassifyCna =
    "According to the given text, which of the following is this comment talking about?\n"
    "- Need: A community issue, problem, or need (Something negative the community is concerned "
    "with. Or something the community is missing)\n"
    "- Asset: A community highlight, strength, or asset (Something positive the community has)\n"
    "- Other: Other (If unsure write what it is about)\n"
    "- None: None of the above (the comment is about something else and has nothing to do with "
    "the community)\n";

constexpr std::string_view kClassifyNeed =
    "According to the given text, which of the following community needs is this comment talking "
    "about?\n"
    "- E1: Basic Needs\n"
    "- E2: Education\n"
    "- E3: Employment\n"
    "- E4: Out of School Time\n"
    "- E5: Family Supports\n"
    "- E6: Support for Special Population\n"
    "- E7: Other\n"
    "- E8: Not Applicable\n";

constexpr std::string_view kCategorizeNeed =
    "What kind of programs, services, or needs is this comment talking about?\n"
    "- Basic Needs\n"
    "- Education\n"
    "- Employment & Career Advancement\n"
    "- Out of School Time\n"
    "- Family Supports\n"
    "- Support for Special Population\n"
    "- Other\n";

constexpr std::string_view kCategorizeAsset =
    "What kind of highlight, strength, or asset is this comment talking about?\n"
    "- Human Assets\n"
    "- Institutional and Civic Assets\n"
    "- Physical Assets\n"
    "- Cultural Assets\n";

constexpr std::string_view kBuildKg =
    "You are a knowledge graph creator.\n"
    "A knowledge graph contains entities and relations. Entities have properties \"name\" and "
    "\"type\". Relations have properties \"subject\", \"object\", and \"predicate\".\n"
    "For example, a knowledge graph can be written in JSON with the following structure:\n"
    "{\n"
    "  \"entities\":[\n"
    "    {\n"
    "    \"name\":\"\",\n"
    "    \"type\":\"\"\n"
    "    }\n"
    "  ],\n"
    "  \"relations\":[\n"
    "    {\n"
    "    \"subject\":\"\",\n"
    "    \"object\":\"\",\n"
    "    \"predicate\":\"\"\n"
    "    }\n"
    "  ]\n"
    "}\n"
    "Convert the following text into a knowledge graph and return the answer as JSON:\n";

}  // namespace

std::string_view prompt_template(PromptKind kind) {
  switch (kind) {
    case PromptKind::ClassifyCna: return kClassifyCna;
    case PromptKind::ClassifyNeed: return kClassifyNeed;
    case PromptKind::CategorizeNeed: return kCategorizeNeed;
    case PromptKind::CategorizeAsset: return kCategorizeAsset;
    case PromptKind::BuildKg: return kBuildKg;
  }
  throw ValidationError("unknown prompt kind");
}

std::string prompt_template_hash(PromptKind kind) { return content_hash(prompt_template(kind)); }

std::string_view prompt_kind_name(PromptKind kind) {
  switch (kind) {
    case PromptKind::ClassifyCna: return "classify_cna";
    case PromptKind::ClassifyNeed: return "classify_need";
    case PromptKind::CategorizeNeed: return "categorize_need";
    case PromptKind::CategorizeAsset: return "categorize_asset";
    case PromptKind::BuildKg: return "build_kg";
  }
  throw ValidationError("unknown prompt kind");
}

PromptKind prompt_kind_from_name(std::string_view name) {
  if (name == "classify_cna") return PromptKind::ClassifyCna;
  if (name == "classify_need") return PromptKind::ClassifyNeed;
  if (name == "categorize_need") return PromptKind::CategorizeNeed;
  if (name == "categorize_asset") return PromptKind::CategorizeAsset;
  if (name == "build_kg") return PromptKind::BuildKg;
  throw ValidationError("unknown prompt kind: " + std::string(name));
}

std::string render_prompt(PromptKind kind, const Conversation& conversation,
                          std::size_t truncate_chars, bool* truncated) {
  std::string text = conversation.full_text();
  if (normalize_whitespace(text).empty()) {
    throw ValidationError("render_prompt: conversation " + conversation.id + " has no text");
  }
  bool was_truncated = false;
  if (truncate_chars > 0 && text.size() > truncate_chars) {
    text.resize(truncate_chars);
    was_truncated = true;
  }
  if (truncated != nullptr) *truncated = was_truncated;
  std::string prompt(prompt_template(kind));
  prompt += '\n';
  prompt += text;
  return prompt;
}

}  // namespace cne
