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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cne/featurizer.hpp"
#include "cne/gnn.hpp"
#include "cne/kg.hpp"
#include "cne/labels.hpp"

namespace cne {

struct ExplainerConfig {
  double learning_rate = 0.01;
  int iterations = 100;
  double lambda_size = 0.005;    // penalty on mean mask activation
  double lambda_entropy = 1.0;   // penalty pushing masks towards 0/1
  double threshold = 0.5;        // sigmoid value separating kept from masked
  std::uint64_t seed = 0;
  double init_logit_stddev = 0.1;
  // Default explains the model's own prediction; set to explain the LLM label
  // passed as `target_label` instead.
  bool explain_target_label = false;
};

/// Soft masks learned per edge and node; mask value = sigmoid(logit).
struct MaskSet {
  Eigen::VectorXd edge_logits;
  Eigen::VectorXd node_logits;

  Eigen::VectorXd edge_values() const;  // sigmoid, strictly inside (0,1)
  Eigen::VectorXd node_values() const;
};

struct ExplanationSubgraph {
  std::string conversation_id;
  std::vector<std::string> kept_nodes;
  std::vector<std::string> masked_nodes;
  std::vector<std::size_t> kept_edges;   // indices into the subgraph triples
  std::vector<std::size_t> masked_edges;
  std::map<std::string, double> node_importance;  // sigmoid values in (0,1)
  std::vector<double> edge_importance;            // aligned with triples
  NeedLabel predicted_label = NeedLabel::E8_NotApplicable;
  double fidelity = 0.0;  // probability retained under the hard 0/1 mask
  std::vector<double> objective_trace;  // objective value per iteration
  ExplainerConfig config;
};

/// GNNExplainer-style optimization: learn masks that keep the model's
/// prediction while penalizing mask size and entropy. Requires >= 1 edge
/// (UnexplainableError otherwise). Deterministic under a fixed seed.
ExplanationSubgraph explain(const CneModel& model, const KnowledgeSubgraph& subgraph,
                            const FeatureMatrix& features, const ExplainerConfig& config,
                            std::optional<int> target_label = std::nullopt);

/// Render via the graph exports: masked nodes red, masked edges dashed,
/// importances as attributes. Throws when the explanation belongs to a
/// different subgraph.
std::string render_explanation_dot(const KnowledgeSubgraph& subgraph,
                                   const ExplanationSubgraph& explanation);
std::string render_explanation_graphml(const KnowledgeSubgraph& subgraph,
                                       const ExplanationSubgraph& explanation);

MaskOverlay to_overlay(const ExplanationSubgraph& explanation);

std::string explanation_to_json_string(const ExplanationSubgraph& explanation);

}  // namespace cne
