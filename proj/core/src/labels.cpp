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

#include "cne/labels.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <vector>

#include "cne/errors.hpp"

namespace cne {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

template <typename LabelT>
struct Rule {
  LabelT label;
  std::string_view canonical;  // exact-match form
  std::string_view code;       // prefix form, empty when the taxonomy has no codes
  std::string_view name;       // substring form
};

// Shared matcher implementing the documented order. Returns nullopt when no
// rule fires; the caller supplies the taxonomy fallback.
template <typename LabelT, std::size_t N>
std::optional<LabelT> match(std::string_view raw, const std::array<Rule<LabelT>, N>& rules) {
  const std::string_view text = trim(raw);
  if (text.empty()) return std::nullopt;

  for (const auto& rule : rules) {
    if (text == rule.canonical) return rule.label;
  }

  for (const auto& rule : rules) {
    if (rule.code.empty()) continue;
    if (text.size() >= rule.code.size() && text.substr(0, rule.code.size()) == rule.code) {
      // Boundary check keeps "E1" from matching inside a longer token.
      if (text.size() == rule.code.size() ||
          !std::isalnum(static_cast<unsigned char>(text[rule.code.size()]))) {
        return rule.label;
      }
    }
  }

  const std::string lowered = lowercase(text);
  std::optional<LabelT> best;
  std::size_t best_len = 0;
  for (const auto& rule : rules) {
    const std::string needle = lowercase(rule.name);
    if (lowered.find(needle) != std::string::npos && needle.size() > best_len) {
      best = rule.label;
      best_len = needle.size();
    }
  }
  return best;
}

constexpr std::array<Rule<NeedLabel>, kNeedLabelCount> kNeedRules = {{
    {NeedLabel::E1_BasicNeeds, "E1: Basic Needs", "E1", "Basic Needs"},
    {NeedLabel::E2_Education, "E2: Education", "E2", "Education"},
    {NeedLabel::E3_Employment, "E3: Employment", "E3", "Employment"},
    {NeedLabel::E4_OutOfSchoolTime, "E4: Out of School Time", "E4", "Out of School Time"},
    {NeedLabel::E5_FamilySupports, "E5: Family Supports", "E5", "Family Supports"},
    {NeedLabel::E6_SupportSpecialPopulation, "E6: Support for Special Population", "E6",
     "Support for Special Population"},
    {NeedLabel::E7_Other, "E7: Other", "E7", "Other"},
    {NeedLabel::E8_NotApplicable, "E8: Not Applicable", "E8", "Not Applicable"},
}};

constexpr std::array<Rule<CnaLabel>, 4> kCnaRules = {{
    {CnaLabel::Need, "Need", "", "Need"},
    {CnaLabel::Asset, "Asset", "", "Asset"},
    {CnaLabel::Other, "Other", "", "Other"},
    {CnaLabel::None, "None", "", "None"},
}};

constexpr std::array<Rule<NeedCategory>, 7> kNeedCategoryRules = {{
    {NeedCategory::BasicNeeds, "Basic Needs", "", "Basic Needs"},
    {NeedCategory::Education, "Education", "", "Education"},
    {NeedCategory::Employment, "Employment & Career Advancement", "", "Employment"},
    {NeedCategory::OutOfSchoolTime, "Out of School Time", "", "Out of School Time"},
    {NeedCategory::FamilySupports, "Family Supports", "", "Family Supports"},
    {NeedCategory::SupportSpecialPopulation, "Support for Special Population", "",
     "Support for Special Population"},
    {NeedCategory::Other, "Other", "", "Other"},
}};

constexpr std::array<Rule<AssetCategory>, 5> kAssetCategoryRules = {{
    {AssetCategory::Human, "Human Assets", "", "Human"},
    {AssetCategory::InstitutionalCivic, "Institutional and Civic Assets", "",
     "Institutional and Civic"},
    {AssetCategory::Physical, "Physical Assets", "", "Physical"},
    {AssetCategory::Cultural, "Cultural Assets", "", "Cultural"},
    {AssetCategory::Other, "Other", "", "Other"},
}};

}  // namespace

std::string_view display(NeedLabel label) {
  return kNeedRules[static_cast<std::size_t>(label)].canonical;
}

std::string_view display(CnaLabel label) {
  return kCnaRules[static_cast<std::size_t>(label)].canonical;
}

std::string_view display(NeedCategory category) {
  return kNeedCategoryRules[static_cast<std::size_t>(category)].canonical;
}

std::string_view display(AssetCategory category) {
  return kAssetCategoryRules[static_cast<std::size_t>(category)].canonical;
}

int to_index(NeedLabel label) { return static_cast<int>(label); }

NeedLabel need_label_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kNeedLabelCount)) {
    throw ValidationError("need label index out of range: " + std::to_string(index));
  }
  return static_cast<NeedLabel>(index);
}

const std::array<NeedLabel, kNeedLabelCount>& all_need_labels() {
  static const std::array<NeedLabel, kNeedLabelCount> labels = {
      NeedLabel::E1_BasicNeeds,          NeedLabel::E2_Education,
      NeedLabel::E3_Employment,          NeedLabel::E4_OutOfSchoolTime,
      NeedLabel::E5_FamilySupports,      NeedLabel::E6_SupportSpecialPopulation,
      NeedLabel::E7_Other,               NeedLabel::E8_NotApplicable,
  };
  return labels;
}

Parsed<NeedLabel> parse_need_label(std::string_view raw) {
  if (auto hit = match(raw, kNeedRules)) return {*hit, false};
  return {NeedLabel::E8_NotApplicable, true};
}

Parsed<CnaLabel> parse_cna_label(std::string_view raw) {
  if (auto hit = match(raw, kCnaRules)) return {*hit, false};
  return {CnaLabel::None, true};
}

Parsed<NeedCategory> parse_need_category(std::string_view raw) {
  if (auto hit = match(raw, kNeedCategoryRules)) return {*hit, false};
  return {NeedCategory::Other, true};
}

Parsed<AssetCategory> parse_asset_category(std::string_view raw) {
  if (auto hit = match(raw, kAssetCategoryRules)) return {*hit, false};
  return {AssetCategory::Other, true};
}

CnaLabel collapse_none(CnaLabel label) {
  return label == CnaLabel::None ? CnaLabel::Other : label;
}

}  // namespace cne
