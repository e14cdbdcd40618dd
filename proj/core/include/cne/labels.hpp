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

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace cne {

// Closed community-needs taxonomy. Display strings are canonical and frozen;
// parse(display(x)) == x must hold for every code.
enum class NeedLabel {
  E1_BasicNeeds,
  E2_Education,
  E3_Employment,
  E4_OutOfSchoolTime,
  E5_FamilySupports,
  E6_SupportSpecialPopulation,
  E7_Other,
  E8_NotApplicable,
};

inline constexpr std::size_t kNeedLabelCount = 8;

enum class CnaLabel { Need, Asset, Other, None };

enum class NeedCategory {
  BasicNeeds,
  Education,
  Employment,
  OutOfSchoolTime,
  FamilySupports,
  SupportSpecialPopulation,
  Other,
};

enum class AssetCategory { Human, InstitutionalCivic, Physical, Cultural, Other };

std::string_view display(NeedLabel label);
std::string_view display(CnaLabel label);
std::string_view display(NeedCategory category);
std::string_view display(AssetCategory category);

int to_index(NeedLabel label);
NeedLabel need_label_from_index(int index);

const std::array<NeedLabel, kNeedLabelCount>& all_need_labels();

/// Result of rule-based response parsing; total, never throws.
/// `unparsed` marks responses that fell through to the taxonomy fallback.
template <typename LabelT>
struct Parsed {
  LabelT label;
  bool unparsed = false;
};

// Matching order: exact canonical string, then code prefix ("E3"), then
// case-insensitive category-name substring with longest-match tie-break.
Parsed<NeedLabel> parse_need_label(std::string_view raw);
Parsed<CnaLabel> parse_cna_label(std::string_view raw);
Parsed<NeedCategory> parse_need_category(std::string_view raw);
Parsed<AssetCategory> parse_asset_category(std::string_view raw);

/// Report-time collapse: None folds into Other; the raw code stays on record.
CnaLabel collapse_none(CnaLabel label);

}  // namespace cne
