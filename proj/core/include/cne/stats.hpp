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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cne/labels.hpp"

namespace cne {

/// Cross-tabulation of two annotators (or two conditions).
/// Kappa additionally requires the same label set on both axes.
struct ContingencyTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<double>> counts;  // counts[row][col], non-negative

  double total() const;
  bool square() const { return row_labels == col_labels; }
};

/// Build a square table over `labels` from paired annotations (a, b).
ContingencyTable contingency_from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<std::string>& labels);

/// Cohen's kappa, chance-corrected two-annotator agreement.
/// Throws ValidationError for non-square tables and DegenerateAgreementError
/// when expected agreement is 1.
double cohen_kappa(const ContingencyTable& table);

struct MeanKappaResult {
  double mean = 0.0;
  std::map<std::string, double> per_community;
  std::vector<std::string> excluded;  // degenerate communities, with reasons
};

/// Unweighted mean of per-community kappas; degenerate tables are excluded
/// and reported rather than failing the whole aggregation.
MeanKappaResult mean_kappa(const std::map<std::string, ContingencyTable>& tables);

/// units x annotators matrix of nominal labels; nullopt marks missing ratings.
struct ReliabilityData {
  std::vector<std::vector<std::optional<std::string>>> units;
};

/// Krippendorff's alpha, nominal metric, coincidence-matrix formulation with
/// missing-data support. All-identical labels yield exactly 1.0.
double krippendorff_alpha(const ReliabilityData& data);

struct Chi2Result {
  double chi2 = 0.0;
  double p = 1.0;
  int dof = 1;
};

/// Pearson chi-squared on a 2x2 table, no continuity correction.
/// Requires every expected count > 0 (throws ValidationError otherwise).
Chi2Result chi_squared_2x2(const std::array<std::array<double, 2>, 2>& counts);

struct AnovaResult {
  double f = 0.0;
  double p = 1.0;
  int dof_between = 0;
  int dof_within = 0;
  // Set when within-group variance is zero but between-group variance is not;
  // F is then infinite and p pinned to 0 by convention.
  bool degenerate_within = false;
};

/// One-way ANOVA over >=2 groups. All-identical data yields F=0, p=1.
AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

struct LabeledAnnotation {
  std::string community;
  std::string provider_id;
  NeedLabel label;
};

struct NeedDistribution {
  std::string community;
  std::string provider_id;
  std::array<std::size_t, kNeedLabelCount> counts{};
  std::array<double, kNeedLabelCount> proportions{};
};

/// Per-(community, provider) label proportions. With `exclude_e8`, E8 items
/// are dropped before normalizing; groups left empty are skipped with a
/// warning instead of producing a degenerate distribution.
std::vector<NeedDistribution> need_distribution(const std::vector<LabeledAnnotation>& annotations,
                                                bool exclude_e8 = false,
                                                std::vector<std::string>* warnings = nullptr);

// Special functions backing the p-values. Series/continued-fraction
// implementations, exposed so tests can pin them against tabulated values.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);
double regularized_beta(double a, double b, double x);

}  // namespace cne
