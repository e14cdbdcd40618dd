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

#include "cne/explainer.hpp"

#include <cmath>

#include <json.hpp>

#include "cne/errors.hpp"
#include "cne/rng.hpp"

namespace cne {

using nlohmann::json;

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd sigmoid_vec(const Eigen::VectorXd& logits) {
  return logits.unaryExpr([](double x) { return sigmoid(x); });
}

// Binary entropy with a clamp; sigmoid outputs never reach 0/1 exactly but
// the clamp keeps the log finite under extreme logits.
inline double binary_entropy(double p) {
  const double q = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
  return -q * std::log(q) - (1.0 - q) * std::log(1.0 - q);
}

inline double binary_entropy_grad(double p) {
  const double q = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
  return std::log((1.0 - q) / q);
}

}  // namespace

Eigen::VectorXd MaskSet::edge_values() const { return sigmoid_vec(edge_logits); }
Eigen::VectorXd MaskSet::node_values() const { return sigmoid_vec(node_logits); }

ExplanationSubgraph explain(const CneModel& model, const KnowledgeSubgraph& subgraph,
                            const FeatureMatrix& features, const ExplainerConfig& config,
                            std::optional<int> target_label) {
  if (subgraph.triples.empty()) {
    throw UnexplainableError("explain: subgraph " + subgraph.conversation_id + " has no edges");
  }
  if (config.explain_target_label && !target_label.has_value()) {
    throw ValidationError("explain: explain_target_label set but no target label given");
  }

  const Batch batch = Batch::pack({&features}, {&subgraph});
  const auto n_edges = static_cast<Eigen::Index>(batch.edges.size());
  const auto n_nodes = batch.node_features.rows();

  // The label being explained: the model's own argmax unless configured to
  // explain an externally supplied label.
  const Eigen::MatrixXd clean_logits = forward(model, batch);
  Eigen::Index model_argmax = 0;
  clean_logits.row(0).maxCoeff(&model_argmax);
  const int label = config.explain_target_label ? *target_label : static_cast<int>(model_argmax);
  if (label < 0 || label >= model.classes) {
    throw ValidationError("explain: target label out of range");
  }

  MaskSet mask_set;
  Rng rng(config.seed);
  mask_set.edge_logits.resize(n_edges);
  for (Eigen::Index i = 0; i < n_edges; ++i) {
    mask_set.edge_logits[i] = rng.normal(0.0, config.init_logit_stddev);
  }
  mask_set.node_logits.resize(n_nodes);
  for (Eigen::Index i = 0; i < n_nodes; ++i) {
    mask_set.node_logits[i] = rng.normal(0.0, config.init_logit_stddev);
  }

  // Adam over the mask logits only.
  Eigen::VectorXd m_edge = Eigen::VectorXd::Zero(n_edges);
  Eigen::VectorXd v_edge = Eigen::VectorXd::Zero(n_edges);
  Eigen::VectorXd m_node = Eigen::VectorXd::Zero(n_nodes);
  Eigen::VectorXd v_node = Eigen::VectorXd::Zero(n_nodes);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  ExplanationSubgraph result;
  result.conversation_id = subgraph.conversation_id;
  result.config = config;
  result.predicted_label = need_label_from_index(static_cast<int>(model_argmax));

  const std::vector<int> labels = {label};
  for (int iter = 1; iter <= config.iterations; ++iter) {
    Masks masks;
    masks.edge = mask_set.edge_values();
    masks.node = mask_set.node_values();

    auto [ce, grads] = loss_and_grads(model, batch, labels, &masks, /*want_mask_grads=*/true);

    double objective = ce;
    // Size penalty: lambda_size * (mean edge mask + mean node mask).
    objective += config.lambda_size * (masks.edge.mean() + masks.node.mean());
    // Entropy penalty: lambda_ent * (mean H(edge) + mean H(node)).
    double edge_entropy = 0.0;
    for (Eigen::Index i = 0; i < n_edges; ++i) edge_entropy += binary_entropy(masks.edge[i]);
    double node_entropy = 0.0;
    for (Eigen::Index i = 0; i < n_nodes; ++i) node_entropy += binary_entropy(masks.node[i]);
    objective += config.lambda_entropy * (edge_entropy / static_cast<double>(n_edges) +
                                          node_entropy / static_cast<double>(n_nodes));
    if (!std::isfinite(objective)) {
      throw ValidationError("explain: non-finite objective for " + subgraph.conversation_id +
                            " at iteration " + std::to_string(iter));
    }
    result.objective_trace.push_back(objective);

    // d objective / d logit = (dCE/dmask + penalty terms) * sigmoid'(logit).
    Eigen::VectorXd g_edge(n_edges);
    for (Eigen::Index i = 0; i < n_edges; ++i) {
      const double p = masks.edge[i];
      double g = grads.edge_mask[i];
      g += config.lambda_size / static_cast<double>(n_edges);
      g += config.lambda_entropy * binary_entropy_grad(p) / static_cast<double>(n_edges);
      g_edge[i] = g * p * (1.0 - p);
    }
    Eigen::VectorXd g_node(n_nodes);
    for (Eigen::Index i = 0; i < n_nodes; ++i) {
      const double p = masks.node[i];
      double g = grads.node_mask[i];
      g += config.lambda_size / static_cast<double>(n_nodes);
      g += config.lambda_entropy * binary_entropy_grad(p) / static_cast<double>(n_nodes);
      g_node[i] = g * p * (1.0 - p);
    }

    const double bias1 = 1.0 - std::pow(beta1, iter);
    const double bias2 = 1.0 - std::pow(beta2, iter);
    for (Eigen::Index i = 0; i < n_edges; ++i) {
      m_edge[i] = beta1 * m_edge[i] + (1.0 - beta1) * g_edge[i];
      v_edge[i] = beta2 * v_edge[i] + (1.0 - beta2) * g_edge[i] * g_edge[i];
      mask_set.edge_logits[i] -=
          config.learning_rate * (m_edge[i] / bias1) / (std::sqrt(v_edge[i] / bias2) + eps);
    }
    for (Eigen::Index i = 0; i < n_nodes; ++i) {
      m_node[i] = beta1 * m_node[i] + (1.0 - beta1) * g_node[i];
      v_node[i] = beta2 * v_node[i] + (1.0 - beta2) * g_node[i] * g_node[i];
      mask_set.node_logits[i] -=
          config.learning_rate * (m_node[i] / bias1) / (std::sqrt(v_node[i] / bias2) + eps);
    }
  }

  // Final soft masks become importances; threshold splits kept from masked.
  const Eigen::VectorXd edge_values = mask_set.edge_values();
  const Eigen::VectorXd node_values = mask_set.node_values();
  for (std::size_t k = 0; k < subgraph.triples.size(); ++k) {
    result.edge_importance.push_back(edge_values[static_cast<Eigen::Index>(k)]);
    if (edge_values[static_cast<Eigen::Index>(k)] >= config.threshold) {
      result.kept_edges.push_back(k);
    } else {
      result.masked_edges.push_back(k);
    }
  }
  for (std::size_t v = 0; v < subgraph.entities.size(); ++v) {
    const std::string& name = subgraph.entities[v].name;
    const double value = node_values[static_cast<Eigen::Index>(v)];
    result.node_importance[name] = value;
    if (value >= config.threshold) {
      result.kept_nodes.push_back(name);
    } else {
      result.masked_nodes.push_back(name);
    }
  }

  // Fidelity: predicted-class probability under the hard 0/1 mask.
  Masks hard;
  hard.edge = Eigen::VectorXd::Zero(n_edges);
  for (std::size_t k : result.kept_edges) hard.edge[static_cast<Eigen::Index>(k)] = 1.0;
  hard.node = Eigen::VectorXd::Zero(n_nodes);
  for (std::size_t v = 0; v < subgraph.entities.size(); ++v) {
    if (node_values[static_cast<Eigen::Index>(v)] >= config.threshold) {
      hard.node[static_cast<Eigen::Index>(v)] = 1.0;
    }
  }
  const Eigen::MatrixXd hard_logits = forward(model, batch, &hard);
  result.fidelity = softmax(hard_logits.row(0))[label];
  return result;
}

MaskOverlay to_overlay(const ExplanationSubgraph& explanation) {
  MaskOverlay overlay;
  overlay.masked_nodes.insert(explanation.masked_nodes.begin(), explanation.masked_nodes.end());
  overlay.masked_edges.insert(explanation.masked_edges.begin(), explanation.masked_edges.end());
  overlay.node_importance = explanation.node_importance;
  overlay.edge_importance = explanation.edge_importance;
  return overlay;
}

namespace {

void check_explanation_matches(const KnowledgeSubgraph& subgraph,
                               const ExplanationSubgraph& explanation) {
  if (subgraph.conversation_id != explanation.conversation_id) {
    throw ValidationError("explanation belongs to " + explanation.conversation_id +
                          ", not subgraph " + subgraph.conversation_id);
  }
  if (explanation.edge_importance.size() != subgraph.triples.size()) {
    throw ValidationError("explanation edge count does not match subgraph " +
                          subgraph.conversation_id);
  }
}

}  // namespace

std::string render_explanation_dot(const KnowledgeSubgraph& subgraph,
                                   const ExplanationSubgraph& explanation) {
  check_explanation_matches(subgraph, explanation);
  const MaskOverlay overlay = to_overlay(explanation);
  return to_dot(subgraph, &overlay);
}

std::string render_explanation_graphml(const KnowledgeSubgraph& subgraph,
                                       const ExplanationSubgraph& explanation) {
  check_explanation_matches(subgraph, explanation);
  const MaskOverlay overlay = to_overlay(explanation);
  return to_graphml(subgraph, &overlay);
}

std::string explanation_to_json_string(const ExplanationSubgraph& explanation) {
  json doc;
  doc["conversation_id"] = explanation.conversation_id;
  doc["predicted_label"] = std::string(display(explanation.predicted_label));
  doc["kept_nodes"] = explanation.kept_nodes;
  doc["masked_nodes"] = explanation.masked_nodes;
  doc["kept_edges"] = explanation.kept_edges;
  doc["masked_edges"] = explanation.masked_edges;
  doc["node_importance"] = explanation.node_importance;
  doc["edge_importance"] = explanation.edge_importance;
  doc["fidelity"] = explanation.fidelity;
  doc["config"] = {{"learning_rate", explanation.config.learning_rate},
                   {"iterations", explanation.config.iterations},
                   {"lambda_size", explanation.config.lambda_size},
                   {"lambda_entropy", explanation.config.lambda_entropy},
                   {"threshold", explanation.config.threshold},
                   {"seed", explanation.config.seed}};
  return doc.dump(2) + "\n";
}

}  // namespace cne
