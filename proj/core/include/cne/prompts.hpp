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

#include <string>
#include <string_view>

#include "cne/corpus.hpp"

namespace cne {

enum class PromptKind { ClassifyCna, ClassifyNeed, CategorizeNeed, CategorizeAsset, BuildKg };

/// Embedded copy of the versioned template under core/resources/prompts/.
/// A test pins the embedded bytes against the resource files.
std::string_view prompt_template(PromptKind kind);

/// Content hash of the template, recorded in every Annotation for versioning.
std::string prompt_template_hash(PromptKind kind);

std::string_view prompt_kind_name(PromptKind kind);
PromptKind prompt_kind_from_name(std::string_view name);

/// Template followed by a blank line and the conversation's full text.
/// `truncate_chars` > 0 caps the appended text; `truncated` reports whether
/// the cap fired so callers can record it.
std::string render_prompt(PromptKind kind, const Conversation& conversation,
                          std::size_t truncate_chars = 0, bool* truncated = nullptr);

}  // namespace cne
