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

#include "cne/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "cne/errors.hpp"

namespace cne {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kEps = 1e-15;
constexpr double kTiny = 1e-300;

// Series expansion of P(a, x); converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x); converges fast for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Lentz continued fraction for the incomplete beta (Numerical-Recipes form).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw ValidationError("regularized_gamma_p: requires a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw ValidationError("regularized_gamma_q: requires a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

double regularized_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw ValidationError("regularized_beta: requires a, b > 0");
  if (x < 0.0 || x > 1.0) throw ValidationError("regularized_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double ContingencyTable::total() const {
  double sum = 0.0;
  for (const auto& row : counts) {
    sum = std::accumulate(row.begin(), row.end(), sum);
  }
  return sum;
}

ContingencyTable contingency_from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<std::string>& labels) {
  ContingencyTable table;
  table.row_labels = labels;
  table.col_labels = labels;
  table.counts.assign(labels.size(), std::vector<double>(labels.size(), 0.0));
  for (const auto& [a, b] : pairs) {
    const auto ra = std::find(labels.begin(), labels.end(), a);
    const auto cb = std::find(labels.begin(), labels.end(), b);
    if (ra == labels.end() || cb == labels.end()) {
      throw ValidationError("contingency_from_pairs: label outside the declared set: " + a + "/" + b);
    }
    table.counts[static_cast<std::size_t>(ra - labels.begin())]
                [static_cast<std::size_t>(cb - labels.begin())] += 1.0;
  }
  return table;
}

double cohen_kappa(const ContingencyTable& table) {
  if (!table.square() || table.counts.size() != table.row_labels.size()) {
    throw ValidationError("cohen_kappa: table must be square with identical label sets");
  }
  for (const auto& row : table.counts) {
    if (row.size() != table.col_labels.size()) {
      throw ValidationError("cohen_kappa: ragged counts matrix");
    }
    for (double c : row) {
      if (c < 0.0) throw ValidationError("cohen_kappa: negative count");
    }
  }
  const double total = table.total();
  if (total <= 0.0) throw ValidationError("cohen_kappa: empty table");

  const std::size_t n = table.counts.size();
  double trace = 0.0;
  std::vector<double> row_sums(n, 0.0), col_sums(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    trace += table.counts[i][i];
    for (std::size_t j = 0; j < n; ++j) {
      row_sums[i] += table.counts[i][j];
      col_sums[j] += table.counts[i][j];
    }
  }
  const double p_o = trace / total;
  double p_e = 0.0;
  for (std::size_t k = 0; k < n; ++k) p_e += row_sums[k] * col_sums[k];
  p_e /= total * total;

  if (p_e >= 1.0 - 1e-12) {
    throw DegenerateAgreementError("cohen_kappa: expected agreement is 1 (degenerate marginals)");
  }
  return (p_o - p_e) / (1.0 - p_e);
}

MeanKappaResult mean_kappa(const std::map<std::string, ContingencyTable>& tables) {
  if (tables.empty()) throw ValidationError("mean_kappa: no communities");
  MeanKappaResult result;
  double sum = 0.0;
  std::size_t used = 0;
  for (const auto& [community, table] : tables) {
    try {
      const double kappa = cohen_kappa(table);
      result.per_community[community] = kappa;
      sum += kappa;
      ++used;
    } catch (const DegenerateAgreementError& e) {
      result.excluded.push_back(community + ": " + e.what());
    }
  }
  if (used == 0) throw DegenerateAgreementError("mean_kappa: every community degenerate");
  result.mean = sum / static_cast<double>(used);
  return result;
}

double krippendorff_alpha(const ReliabilityData& data) {
  // Category index assignment in first-appearance order.
  std::vector<std::string> categories;
  auto category_index = [&categories](const std::string& value) {
    const auto it = std::find(categories.begin(), categories.end(), value);
    if (it != categories.end()) return static_cast<std::size_t>(it - categories.begin());
    categories.push_back(value);
    return categories.size() - 1;
  };

  // Coincidence matrix: each pairable unit contributes every ordered pair of
  // its ratings, weighted 1/(m_u - 1).
  std::vector<std::vector<double>> coincidence;
  auto ensure_size = [&coincidence](std::size_t n) {
    while (coincidence.size() < n) {
      coincidence.emplace_back();
    }
    for (auto& row : coincidence) row.resize(n, 0.0);
  };

  double pairable_values = 0.0;
  for (const auto& unit : data.units) {
    std::vector<std::size_t> present;
    for (const auto& rating : unit) {
      if (rating.has_value()) present.push_back(category_index(*rating));
    }
    const std::size_t m = present.size();
    if (m < 2) continue;
    pairable_values += static_cast<double>(m);
    ensure_size(categories.size());
    const double weight = 1.0 / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j) continue;
        coincidence[present[i]][present[j]] += weight;
      }
    }
  }

  if (pairable_values < 2.0) {
    throw ValidationError("krippendorff_alpha: no pairable values");
  }

  ensure_size(categories.size());
  const std::size_t n_cat = categories.size();
  std::vector<double> marginals(n_cat, 0.0);
  double observed_disagreement = 0.0;
  double n_total = 0.0;
  for (std::size_t c = 0; c < n_cat; ++c) {
    for (std::size_t k = 0; k < n_cat; ++k) {
      marginals[c] += coincidence[c][k];
      if (c != k) observed_disagreement += coincidence[c][k];
    }
    n_total += marginals[c];
  }

  if (observed_disagreement == 0.0) return 1.0;

  double expected_pairs = 0.0;
  for (std::size_t c = 0; c < n_cat; ++c) {
    for (std::size_t k = 0; k < n_cat; ++k) {
      if (c != k) expected_pairs += marginals[c] * marginals[k];
    }
  }
  const double d_o = observed_disagreement / n_total;
  const double d_e = expected_pairs / (n_total * (n_total - 1.0));
  if (d_e == 0.0) {
    throw ValidationError("krippendorff_alpha: zero expected disagreement with observed disagreement");
  }
  return 1.0 - d_o / d_e;
}

Chi2Result chi_squared_2x2(const std::array<std::array<double, 2>, 2>& counts) {
  const double row0 = counts[0][0] + counts[0][1];
  const double row1 = counts[1][0] + counts[1][1];
  const double col0 = counts[0][0] + counts[1][0];
  const double col1 = counts[0][1] + counts[1][1];
  const double total = row0 + row1;
  if (row0 <= 0.0 || row1 <= 0.0 || col0 <= 0.0 || col1 <= 0.0) {
    throw ValidationError("chi_squared_2x2: zero marginal");
  }
  for (const auto& row : counts) {
    for (double c : row) {
      if (c < 0.0) throw ValidationError("chi_squared_2x2: negative count");
    }
  }

  const double rows[2] = {row0, row1};
  const double cols[2] = {col0, col1};
  double chi2 = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double expected = rows[i] * cols[j] / total;
      const double diff = counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - expected;
      chi2 += diff * diff / expected;
    }
  }
  Chi2Result result;
  result.chi2 = chi2;
  result.dof = 1;
  result.p = regularized_gamma_q(0.5, chi2 / 2.0);
  return result;
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw ValidationError("anova_oneway: needs at least 2 groups");
  std::size_t total_n = 0;
  bool has_replicate = false;
  for (const auto& group : groups) {
    if (group.empty()) throw ValidationError("anova_oneway: empty group");
    if (group.size() >= 2) has_replicate = true;
    total_n += group.size();
  }
  if (!has_replicate) throw ValidationError("anova_oneway: no group has 2+ values");

  double grand_sum = 0.0;
  for (const auto& group : groups) grand_sum = std::accumulate(group.begin(), group.end(), grand_sum);
  const double grand_mean = grand_sum / static_cast<double>(total_n);

  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& group : groups) {
    const double mean =
        std::accumulate(group.begin(), group.end(), 0.0) / static_cast<double>(group.size());
    ss_between += static_cast<double>(group.size()) * (mean - grand_mean) * (mean - grand_mean);
    for (double v : group) ss_within += (v - mean) * (v - mean);
  }

  AnovaResult result;
  result.dof_between = static_cast<int>(groups.size()) - 1;
  result.dof_within = static_cast<int>(total_n - groups.size());

  if (ss_between == 0.0 && ss_within == 0.0) {
    // All values identical everywhere: documented F=0, p=1 convention.
    result.f = 0.0;
    result.p = 1.0;
    return result;
  }
  if (ss_within == 0.0) {
    result.f = std::numeric_limits<double>::infinity();
    result.p = 0.0;
    result.degenerate_within = true;
    return result;
  }

  const double ms_between = ss_between / result.dof_between;
  const double ms_within = ss_within / result.dof_within;
  result.f = ms_between / ms_within;
  const double d1 = result.dof_between;
  const double d2 = result.dof_within;
  // Upper tail of the F distribution via the incomplete beta.
  result.p = regularized_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * result.f));
  return result;
}

std::vector<NeedDistribution> need_distribution(const std::vector<LabeledAnnotation>& annotations,
                                                bool exclude_e8,
                                                std::vector<std::string>* warnings) {
  std::map<std::pair<std::string, std::string>, std::array<std::size_t, kNeedLabelCount>> counts;
  for (const auto& a : annotations) {
    counts[{a.community, a.provider_id}][static_cast<std::size_t>(to_index(a.label))] += 1;
  }

  std::vector<NeedDistribution> result;
  for (const auto& [key, group_counts] : counts) {
    NeedDistribution dist;
    dist.community = key.first;
    dist.provider_id = key.second;
    dist.counts = group_counts;
    if (exclude_e8) dist.counts[static_cast<std::size_t>(to_index(NeedLabel::E8_NotApplicable))] = 0;
    const std::size_t total = std::accumulate(dist.counts.begin(), dist.counts.end(), std::size_t{0});
    if (total == 0) {
      if (warnings != nullptr) {
        warnings->push_back("need_distribution: skipped empty group " + key.first + "/" + key.second);
      }
      continue;
    }
    for (std::size_t i = 0; i < kNeedLabelCount; ++i) {
      dist.proportions[i] = static_cast<double>(dist.counts[i]) / static_cast<double>(total);
    }
    result.push_back(std::move(dist));
  }
  return result;
}

}  // namespace cne
