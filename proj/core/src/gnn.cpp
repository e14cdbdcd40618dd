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

#include "cne/gnn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cne/errors.hpp"
#include "cne/rng.hpp"

namespace cne {

using nlohmann::json;

std::string_view aggregation_mode_name(AggregationMode mode) {
  return mode == AggregationMode::EdgeConditioned ? "edge_conditioned" : "node_feature";
}

AggregationMode aggregation_mode_from_name(std::string_view name) {
  if (name == "edge_conditioned") return AggregationMode::EdgeConditioned;
  if (name == "node_feature") return AggregationMode::NodeFeature;
  throw ValidationError("unknown aggregation mode: " + std::string(name));
}

std::vector<ParamRef> param_refs(ParamBlock& block) {
  return {
      {"layer1.w_self", block.layer1.w_self.data(), static_cast<std::size_t>(block.layer1.w_self.size())},
      {"layer1.w_nbr", block.layer1.w_nbr.data(), static_cast<std::size_t>(block.layer1.w_nbr.size())},
      {"layer1.bias", block.layer1.bias.data(), static_cast<std::size_t>(block.layer1.bias.size())},
      {"layer2.w_self", block.layer2.w_self.data(), static_cast<std::size_t>(block.layer2.w_self.size())},
      {"layer2.w_nbr", block.layer2.w_nbr.data(), static_cast<std::size_t>(block.layer2.w_nbr.size())},
      {"layer2.bias", block.layer2.bias.data(), static_cast<std::size_t>(block.layer2.bias.size())},
      {"prelu1", &block.prelu1, 1},
      {"prelu2", &block.prelu2, 1},
      {"head.w", block.head_w.data(), static_cast<std::size_t>(block.head_w.size())},
      {"head.b", block.head_b.data(), static_cast<std::size_t>(block.head_b.size())},
  };
}

ParamBlock zeros_like(const ParamBlock& block) {
  ParamBlock z;
  z.layer1.w_self = Eigen::MatrixXd::Zero(block.layer1.w_self.rows(), block.layer1.w_self.cols());
  z.layer1.w_nbr = Eigen::MatrixXd::Zero(block.layer1.w_nbr.rows(), block.layer1.w_nbr.cols());
  z.layer1.bias = Eigen::VectorXd::Zero(block.layer1.bias.size());
  z.layer2.w_self = Eigen::MatrixXd::Zero(block.layer2.w_self.rows(), block.layer2.w_self.cols());
  z.layer2.w_nbr = Eigen::MatrixXd::Zero(block.layer2.w_nbr.rows(), block.layer2.w_nbr.cols());
  z.layer2.bias = Eigen::VectorXd::Zero(block.layer2.bias.size());
  z.prelu1 = 0.0;
  z.prelu2 = 0.0;
  z.head_w = Eigen::MatrixXd::Zero(block.head_w.rows(), block.head_w.cols());
  z.head_b = Eigen::VectorXd::Zero(block.head_b.size());
  return z;
}

namespace {

void fill_uniform(Eigen::MatrixXd& m, double bound, Rng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      m(i, j) = rng.uniform(-bound, bound);
    }
  }
}

void fill_uniform(Eigen::VectorXd& v, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-bound, bound);
}

}  // namespace

CneModel init_model(int input_dim, int edge_dim, const TrainConfig& config) {
  if (input_dim <= 0 || edge_dim <= 0 || config.hidden <= 0) {
    throw ValidationError("init_model: dimensions must be positive");
  }
  CneModel model;
  model.input_dim = input_dim;
  model.edge_dim = edge_dim;
  model.hidden = config.hidden;
  model.mode = config.mode;
  model.seed = config.seed;
  model.trained_config = config;

  const int h = config.hidden;
  const int msg1 = config.mode == AggregationMode::EdgeConditioned ? edge_dim : input_dim;
  const int msg2 = config.mode == AggregationMode::EdgeConditioned ? edge_dim : h;

  Rng rng(config.seed);
  model.layer1.w_self.resize(h, input_dim);
  model.layer1.w_nbr.resize(h, msg1);
  model.layer1.bias.resize(h);
  model.layer2.w_self.resize(h, h);
  model.layer2.w_nbr.resize(h, msg2);
  model.layer2.bias.resize(h);
  model.head_w.resize(model.classes, h);
  model.head_b.resize(model.classes);

  fill_uniform(model.layer1.w_self, 1.0 / std::sqrt(static_cast<double>(input_dim)), rng);
  fill_uniform(model.layer1.w_nbr, 1.0 / std::sqrt(static_cast<double>(msg1)), rng);
  fill_uniform(model.layer1.bias, 1.0 / std::sqrt(static_cast<double>(input_dim)), rng);
  fill_uniform(model.layer2.w_self, 1.0 / std::sqrt(static_cast<double>(h)), rng);
  fill_uniform(model.layer2.w_nbr, 1.0 / std::sqrt(static_cast<double>(msg2)), rng);
  fill_uniform(model.layer2.bias, 1.0 / std::sqrt(static_cast<double>(h)), rng);
  model.prelu1 = 0.25;
  model.prelu2 = 0.25;
  fill_uniform(model.head_w, 1.0 / std::sqrt(static_cast<double>(h)), rng);
  fill_uniform(model.head_b, 1.0 / std::sqrt(static_cast<double>(h)), rng);
  return model;
}

Batch Batch::pack(const std::vector<const FeatureMatrix*>& features,
                  const std::vector<const KnowledgeSubgraph*>& subgraphs) {
  if (features.size() != subgraphs.size()) {
    throw ValidationError("Batch::pack: features/subgraphs length mismatch");
  }
  if (features.empty()) throw ValidationError("Batch::pack: empty batch");

  Batch batch;
  batch.num_graphs = static_cast<int>(features.size());
  Eigen::Index total_nodes = 0;
  Eigen::Index total_edges = 0;
  const Eigen::Index in_dim = features[0]->node_features.cols();
  const Eigen::Index edge_dim = features[0]->edge_features.cols();
  for (std::size_t g = 0; g < features.size(); ++g) {
    const FeatureMatrix& f = *features[g];
    const KnowledgeSubgraph& s = *subgraphs[g];
    if (f.node_features.rows() != static_cast<Eigen::Index>(s.entities.size()) ||
        f.edge_features.rows() != static_cast<Eigen::Index>(s.triples.size())) {
      throw ValidationError("Batch::pack: feature rows do not match graph " + s.conversation_id);
    }
    if (f.node_features.cols() != in_dim || f.edge_features.cols() != edge_dim) {
      throw ValidationError("Batch::pack: inconsistent feature width in graph " +
                            s.conversation_id);
    }
    if (s.entities.empty()) {
      throw ValidationError("Batch::pack: graph without nodes: " + s.conversation_id);
    }
    total_nodes += f.node_features.rows();
    total_edges += f.edge_features.rows();
  }

  batch.node_features.resize(total_nodes, in_dim);
  batch.edge_features.resize(total_edges, edge_dim);
  batch.graph_of_node.resize(static_cast<std::size_t>(total_nodes));
  batch.edges.reserve(static_cast<std::size_t>(total_edges));

  Eigen::Index node_offset = 0;
  Eigen::Index edge_offset = 0;
  for (std::size_t g = 0; g < features.size(); ++g) {
    const FeatureMatrix& f = *features[g];
    const KnowledgeSubgraph& s = *subgraphs[g];
    batch.subgraph_ids.push_back(s.conversation_id);
    batch.node_features.middleRows(node_offset, f.node_features.rows()) = f.node_features;
    batch.edge_features.middleRows(edge_offset, f.edge_features.rows()) = f.edge_features;
    for (Eigen::Index v = 0; v < f.node_features.rows(); ++v) {
      batch.graph_of_node[static_cast<std::size_t>(node_offset + v)] = static_cast<int>(g);
    }
    for (const Triple& triple : s.triples) {
      const auto subject_row = f.node_index.find(triple.subject);
      const auto object_row = f.node_index.find(triple.object);
      if (subject_row == f.node_index.end() || object_row == f.node_index.end()) {
        throw ValidationError("Batch::pack: triple endpoint missing from node index in " +
                              s.conversation_id);
      }
      batch.edges.push_back({static_cast<int>(node_offset) + subject_row->second,
                             static_cast<int>(node_offset) + object_row->second});
    }
    node_offset += f.node_features.rows();
    edge_offset += f.edge_features.rows();
  }
  return batch;
}

namespace {

// Per-node incidence: (edge index, other endpoint). Built in edge order so
// neighbor sums have a fixed summation order independent of node relabeling.
std::vector<std::vector<std::pair<int, int>>> build_incidence(
    const std::vector<std::array<int, 2>>& edges, Eigen::Index num_nodes) {
  std::vector<std::vector<std::pair<int, int>>> incidence(
      static_cast<std::size_t>(num_nodes));
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const int s = edges[k][0];
    const int t = edges[k][1];
    if (s < 0 || t < 0 || s >= num_nodes || t >= num_nodes) {
      throw ValidationError("edge endpoint out of range: (" + std::to_string(s) + "," +
                            std::to_string(t) + ") with " + std::to_string(num_nodes) + " nodes");
    }
    incidence[static_cast<std::size_t>(s)].push_back({static_cast<int>(k), t});
    if (t != s) incidence[static_cast<std::size_t>(t)].push_back({static_cast<int>(k), s});
  }
  return incidence;
}

// Undirected masked-mean aggregation. Messages are edge feature rows
// (EdgeConditioned) or the other endpoint's rows of `message_source`
// (NodeFeature). Empty neighborhoods aggregate to the zero vector.
Eigen::MatrixXd aggregate(const std::vector<std::vector<std::pair<int, int>>>& incidence,
                          const Eigen::MatrixXd& edge_feats,
                          const Eigen::MatrixXd& message_source, AggregationMode mode,
                          const Eigen::VectorXd* edge_mask) {
  const Eigen::Index n = static_cast<Eigen::Index>(incidence.size());
  const Eigen::Index width =
      mode == AggregationMode::EdgeConditioned ? edge_feats.cols() : message_source.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, width);
  for (Eigen::Index v = 0; v < n; ++v) {
    const auto& inc = incidence[static_cast<std::size_t>(v)];
    if (inc.empty()) continue;
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(width);
    for (const auto& [k, other] : inc) {
      const double m = edge_mask != nullptr ? (*edge_mask)[k] : 1.0;
      if (mode == AggregationMode::EdgeConditioned) {
        acc += m * edge_feats.row(k);
      } else {
        acc += m * message_source.row(other);
      }
    }
    out.row(v) = acc / static_cast<double>(inc.size());
  }
  return out;
}

// Backward of `aggregate`: routes dA into the message source (NodeFeature
// mode) and accumulates edge mask gradients when requested.
void aggregate_backward(const std::vector<std::vector<std::pair<int, int>>>& incidence,
                        const Eigen::MatrixXd& edge_feats, const Eigen::MatrixXd& message_source,
                        AggregationMode mode, const Eigen::VectorXd* edge_mask,
                        const Eigen::MatrixXd& d_agg, Eigen::MatrixXd* d_message_source,
                        Eigen::VectorXd* d_edge_mask) {
  const Eigen::Index n = static_cast<Eigen::Index>(incidence.size());
  for (Eigen::Index v = 0; v < n; ++v) {
    const auto& inc = incidence[static_cast<std::size_t>(v)];
    if (inc.empty()) continue;
    const double inv_deg = 1.0 / static_cast<double>(inc.size());
    for (const auto& [k, other] : inc) {
      const double m = edge_mask != nullptr ? (*edge_mask)[k] : 1.0;
      if (mode == AggregationMode::NodeFeature && d_message_source != nullptr) {
        d_message_source->row(other) += m * inv_deg * d_agg.row(v);
      }
      if (d_edge_mask != nullptr) {
        const Eigen::RowVectorXd message = mode == AggregationMode::EdgeConditioned
                                               ? Eigen::RowVectorXd(edge_feats.row(k))
                                               : Eigen::RowVectorXd(message_source.row(other));
        (*d_edge_mask)[k] += inv_deg * message.dot(d_agg.row(v));
      }
    }
  }
}

void check_layer_shapes(const Eigen::MatrixXd& node_feats, const Eigen::MatrixXd& edge_feats,
                        const SageParams& params, AggregationMode mode) {
  if (params.w_self.cols() != node_feats.cols()) {
    throw ValidationError("sage_layer: w_self expects input width " +
                          std::to_string(params.w_self.cols()) + ", got " +
                          std::to_string(node_feats.cols()));
  }
  const Eigen::Index message_width =
      mode == AggregationMode::EdgeConditioned ? edge_feats.cols() : node_feats.cols();
  if (params.w_nbr.cols() != message_width) {
    throw ValidationError("sage_layer: w_nbr expects message width " +
                          std::to_string(params.w_nbr.cols()) + ", got " +
                          std::to_string(message_width));
  }
  if (params.w_self.rows() != params.w_nbr.rows() || params.bias.size() != params.w_self.rows()) {
    throw ValidationError("sage_layer: inconsistent output widths across w_self/w_nbr/bias");
  }
}

struct ForwardTrace {
  Eigen::MatrixXd x0m;     // masked input features
  Eigen::MatrixXd agg1;    // layer-1 aggregation
  Eigen::MatrixXd h1p, h1; // pre/post activation
  Eigen::MatrixXd agg2;
  Eigen::MatrixXd h2p, h2;
  Eigen::MatrixXd pooled;  // per-graph means
  Eigen::MatrixXd logits;
  std::vector<int> graph_counts;
  std::vector<std::vector<std::pair<int, int>>> incidence;
};

ForwardTrace run_forward(const CneModel& model, const Batch& batch, const Masks* masks) {
  if (batch.node_features.cols() != model.input_dim) {
    throw ValidationError("forward: model expects input dim " + std::to_string(model.input_dim) +
                          ", batch has " + std::to_string(batch.node_features.cols()));
  }
  if (model.mode == AggregationMode::EdgeConditioned &&
      batch.edge_features.cols() != model.edge_dim) {
    throw ValidationError("forward: model expects edge dim " + std::to_string(model.edge_dim) +
                          ", batch has " + std::to_string(batch.edge_features.cols()));
  }
  const Eigen::Index n = batch.node_features.rows();
  if (masks != nullptr) {
    if (masks->node.size() != n || masks->edge.size() != static_cast<Eigen::Index>(batch.edges.size())) {
      throw ValidationError("forward: mask sizes do not match batch");
    }
  }

  ForwardTrace trace;
  trace.incidence = build_incidence(batch.edges, n);

  trace.x0m = batch.node_features;
  if (masks != nullptr) {
    trace.x0m.array().colwise() *= masks->node.array();
  }
  const Eigen::VectorXd* edge_mask = masks != nullptr ? &masks->edge : nullptr;

  check_layer_shapes(trace.x0m, batch.edge_features, model.layer1, model.mode);
  trace.agg1 = aggregate(trace.incidence, batch.edge_features, trace.x0m, model.mode, edge_mask);
  trace.h1p = trace.x0m * model.layer1.w_self.transpose() +
              trace.agg1 * model.layer1.w_nbr.transpose();
  trace.h1p.rowwise() += model.layer1.bias.transpose();
  trace.h1 = prelu(trace.h1p, model.prelu1);

  check_layer_shapes(trace.h1, batch.edge_features, model.layer2, model.mode);
  trace.agg2 = aggregate(trace.incidence, batch.edge_features, trace.h1, model.mode, edge_mask);
  trace.h2p = trace.h1 * model.layer2.w_self.transpose() +
              trace.agg2 * model.layer2.w_nbr.transpose();
  trace.h2p.rowwise() += model.layer2.bias.transpose();
  trace.h2 = prelu(trace.h2p, model.prelu2);

  trace.graph_counts.assign(static_cast<std::size_t>(batch.num_graphs), 0);
  for (int g : batch.graph_of_node) {
    if (g < 0 || g >= batch.num_graphs) throw ValidationError("forward: membership out of range");
    ++trace.graph_counts[static_cast<std::size_t>(g)];
  }
  trace.pooled = global_mean_pool(trace.h2, batch.graph_of_node, batch.num_graphs);
  trace.logits = trace.pooled * model.head_w.transpose();
  trace.logits.rowwise() += model.head_b.transpose();
  return trace;
}

}  // namespace

Eigen::MatrixXd sage_layer(const Eigen::MatrixXd& node_feats,
                           const std::vector<std::array<int, 2>>& edges,
                           const Eigen::MatrixXd& edge_feats, const SageParams& params,
                           AggregationMode mode, const Eigen::VectorXd* edge_mask,
                           const Eigen::VectorXd* node_mask) {
  if (edge_mask != nullptr && edge_mask->size() != static_cast<Eigen::Index>(edges.size())) {
    throw ValidationError("sage_layer: edge mask size mismatch");
  }
  if (node_mask != nullptr && node_mask->size() != node_feats.rows()) {
    throw ValidationError("sage_layer: node mask size mismatch");
  }
  Eigen::MatrixXd x = node_feats;
  if (node_mask != nullptr) x.array().colwise() *= node_mask->array();
  check_layer_shapes(x, edge_feats, params, mode);
  const auto incidence = build_incidence(edges, x.rows());
  const Eigen::MatrixXd agg = aggregate(incidence, edge_feats, x, mode, edge_mask);
  Eigen::MatrixXd out = x * params.w_self.transpose() + agg * params.w_nbr.transpose();
  out.rowwise() += params.bias.transpose();
  return out;
}

Eigen::MatrixXd prelu(const Eigen::MatrixXd& x, double slope) {
  return (x.array().max(0.0) + slope * x.array().min(0.0)).matrix();
}

Eigen::MatrixXd global_mean_pool(const Eigen::MatrixXd& node_feats,
                                 const std::vector<int>& graph_of_node, int num_graphs) {
  if (static_cast<Eigen::Index>(graph_of_node.size()) != node_feats.rows()) {
    throw ValidationError("global_mean_pool: membership size mismatch");
  }
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(num_graphs, node_feats.cols());
  std::vector<int> counts(static_cast<std::size_t>(num_graphs), 0);
  for (Eigen::Index v = 0; v < node_feats.rows(); ++v) {
    const int g = graph_of_node[static_cast<std::size_t>(v)];
    pooled.row(g) += node_feats.row(v);
    ++counts[static_cast<std::size_t>(g)];
  }
  for (int g = 0; g < num_graphs; ++g) {
    if (counts[static_cast<std::size_t>(g)] == 0) {
      throw ValidationError("global_mean_pool: graph " + std::to_string(g) + " has no nodes");
    }
    pooled.row(g) /= static_cast<double>(counts[static_cast<std::size_t>(g)]);
  }
  return pooled;
}

Eigen::MatrixXd forward(const CneModel& model, const Batch& batch, const Masks* masks) {
  return run_forward(model, batch, masks).logits;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double max_logit = logits.maxCoeff();
  Eigen::VectorXd exps = (logits.array() - max_logit).exp();
  return exps / exps.sum();
}

std::pair<double, Gradients> loss_and_grads(const CneModel& model, const Batch& batch,
                                            const std::vector<int>& labels, const Masks* masks,
                                            bool want_mask_grads) {
  if (static_cast<int>(labels.size()) != batch.num_graphs) {
    throw ValidationError("loss_and_grads: labels size does not match batch graphs");
  }
  for (int label : labels) {
    if (label < 0 || label >= model.classes) {
      throw ValidationError("loss_and_grads: label out of range: " + std::to_string(label));
    }
  }
  if (want_mask_grads && masks == nullptr) {
    throw ValidationError("loss_and_grads: mask gradients need masks");
  }

  const ForwardTrace trace = run_forward(model, batch, masks);
  const int num_graphs = batch.num_graphs;

  // Mean cross-entropy and dlogits = (softmax - onehot) / G.
  double loss = 0.0;
  Eigen::MatrixXd d_logits(num_graphs, model.classes);
  for (int g = 0; g < num_graphs; ++g) {
    const Eigen::VectorXd probs = softmax(trace.logits.row(g));
    loss -= std::log(std::max(probs[labels[static_cast<std::size_t>(g)]], 1e-300));
    d_logits.row(g) = probs.transpose();
    d_logits(g, labels[static_cast<std::size_t>(g)]) -= 1.0;
  }
  loss /= static_cast<double>(num_graphs);
  d_logits /= static_cast<double>(num_graphs);

  if (!std::isfinite(loss)) {
    throw ValidationError("loss_and_grads: NaN loss in batch starting with " +
                          (batch.subgraph_ids.empty() ? std::string("?") : batch.subgraph_ids[0]));
  }

  Gradients grads;
  static_cast<ParamBlock&>(grads) = zeros_like(model);

  // Head.
  grads.head_w = d_logits.transpose() * trace.pooled;
  grads.head_b = d_logits.colwise().sum().transpose();
  const Eigen::MatrixXd d_pooled = d_logits * model.head_w;

  // Pool: every node receives its graph's row scaled by 1/count.
  Eigen::MatrixXd d_h2(trace.h2.rows(), trace.h2.cols());
  for (Eigen::Index v = 0; v < d_h2.rows(); ++v) {
    const int g = batch.graph_of_node[static_cast<std::size_t>(v)];
    d_h2.row(v) =
        d_pooled.row(g) / static_cast<double>(trace.graph_counts[static_cast<std::size_t>(g)]);
  }

  // PReLU layer 2: dy/dx = 1 for x >= 0 else slope; dy/dslope = min(x, 0).
  const Eigen::ArrayXXd neg2 = (trace.h2p.array() < 0.0).cast<double>();
  const Eigen::MatrixXd d_h2p =
      (d_h2.array() * (1.0 - neg2) + d_h2.array() * neg2 * model.prelu2).matrix();
  grads.prelu2 = (d_h2.array() * neg2 * trace.h2p.array()).sum();

  grads.layer2.w_self = d_h2p.transpose() * trace.h1;
  grads.layer2.w_nbr = d_h2p.transpose() * trace.agg2;
  grads.layer2.bias = d_h2p.colwise().sum().transpose();

  Eigen::MatrixXd d_h1 = d_h2p * model.layer2.w_self;
  const Eigen::MatrixXd d_agg2 = d_h2p * model.layer2.w_nbr;

  const Eigen::VectorXd* edge_mask = masks != nullptr ? &masks->edge : nullptr;
  if (want_mask_grads) {
    grads.edge_mask = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(batch.edges.size()));
    grads.node_mask = Eigen::VectorXd::Zero(batch.node_features.rows());
  }
  aggregate_backward(trace.incidence, batch.edge_features, trace.h1, model.mode, edge_mask, d_agg2,
                     model.mode == AggregationMode::NodeFeature ? &d_h1 : nullptr,
                     want_mask_grads ? &grads.edge_mask : nullptr);

  // PReLU layer 1.
  const Eigen::ArrayXXd neg1 = (trace.h1p.array() < 0.0).cast<double>();
  const Eigen::MatrixXd d_h1p =
      (d_h1.array() * (1.0 - neg1) + d_h1.array() * neg1 * model.prelu1).matrix();
  grads.prelu1 = (d_h1.array() * neg1 * trace.h1p.array()).sum();

  grads.layer1.w_self = d_h1p.transpose() * trace.x0m;
  grads.layer1.w_nbr = d_h1p.transpose() * trace.agg1;
  grads.layer1.bias = d_h1p.colwise().sum().transpose();

  Eigen::MatrixXd d_x0m = d_h1p * model.layer1.w_self;
  const Eigen::MatrixXd d_agg1 = d_h1p * model.layer1.w_nbr;
  aggregate_backward(trace.incidence, batch.edge_features, trace.x0m, model.mode, edge_mask, d_agg1,
                     model.mode == AggregationMode::NodeFeature ? &d_x0m : nullptr,
                     want_mask_grads ? &grads.edge_mask : nullptr);

  if (want_mask_grads) {
    // x0m = node_mask * x0, so d(node_mask_v) = x0_v . d(x0m_v).
    for (Eigen::Index v = 0; v < batch.node_features.rows(); ++v) {
      grads.node_mask[v] = batch.node_features.row(v).dot(d_x0m.row(v));
    }
  }
  return {loss, std::move(grads)};
}

AdamOptimizer::AdamOptimizer(double learning_rate, double beta1, double beta2, double epsilon)
    : learning_rate_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

void AdamOptimizer::step(ParamBlock& params, ParamBlock& grads) {
  if (!m_.has_value()) {
    m_ = zeros_like(params);
    v_ = zeros_like(params);
  }
  ++t_;
  const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));

  auto p_refs = param_refs(params);
  auto g_refs = param_refs(grads);
  auto m_refs = param_refs(*m_);
  auto v_refs = param_refs(*v_);
  for (std::size_t i = 0; i < p_refs.size(); ++i) {
    for (std::size_t j = 0; j < p_refs[i].size; ++j) {
      const double g = g_refs[i].data[j];
      double& m = m_refs[i].data[j];
      double& v = v_refs[i].data[j];
      m = beta1_ * m + (1.0 - beta1_) * g;
      v = beta2_ * v + (1.0 - beta2_) * g * g;
      const double m_hat = m / bias1;
      const double v_hat = v / bias2;
      p_refs[i].data[j] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
  }
}

namespace {

bool all_params_finite(ParamBlock& block) {
  for (const auto& ref : param_refs(block)) {
    for (std::size_t i = 0; i < ref.size; ++i) {
      if (!std::isfinite(ref.data[i])) return false;
    }
  }
  return true;
}

EpochStats evaluate(const CneModel& model, const Batch& batch, const std::vector<int>& labels) {
  const Eigen::MatrixXd logits = forward(model, batch);
  EpochStats stats;
  int correct = 0;
  for (int g = 0; g < batch.num_graphs; ++g) {
    const Eigen::VectorXd probs = softmax(logits.row(g));
    stats.loss -= std::log(std::max(probs[labels[static_cast<std::size_t>(g)]], 1e-300));
    Eigen::Index argmax = 0;
    probs.maxCoeff(&argmax);
    if (static_cast<int>(argmax) == labels[static_cast<std::size_t>(g)]) ++correct;
  }
  stats.loss /= static_cast<double>(batch.num_graphs);
  stats.accuracy = static_cast<double>(correct) / static_cast<double>(batch.num_graphs);
  return stats;
}

}  // namespace

std::pair<CneModel, TrainReport> train(const std::vector<const FeatureMatrix*>& features,
                                       const std::vector<const KnowledgeSubgraph*>& subgraphs,
                                       const std::vector<int>& labels, const TrainConfig& config) {
  if (features.empty() || features.size() != subgraphs.size() ||
      features.size() != labels.size()) {
    throw ValidationError("train: features, subgraphs and labels must align and be non-empty");
  }
  const auto start = std::chrono::steady_clock::now();

  const Batch full_batch = Batch::pack(features, subgraphs);
  const int input_dim = static_cast<int>(full_batch.node_features.cols());
  const int edge_dim = static_cast<int>(full_batch.edge_features.cols());

  CneModel model = init_model(input_dim, edge_dim, config);
  AdamOptimizer adam(config.learning_rate, config.adam_beta1, config.adam_beta2,
                     config.adam_epsilon);
  Rng shuffle_rng(config.seed + 1);

  TrainReport report;
  report.seed = config.seed;
  report.config = config;

  CneModel checkpoint = model;
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);

  const int batch_size = std::max(1, config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    bool diverged = false;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(batch_size)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(batch_size));
      std::vector<const FeatureMatrix*> batch_features;
      std::vector<const KnowledgeSubgraph*> batch_graphs;
      std::vector<int> batch_labels;
      for (std::size_t i = begin; i < end; ++i) {
        batch_features.push_back(features[order[i]]);
        batch_graphs.push_back(subgraphs[order[i]]);
        batch_labels.push_back(labels[order[i]]);
      }
      const Batch batch = Batch::pack(batch_features, batch_graphs);
      try {
        auto [loss, grads] = loss_and_grads(model, batch, batch_labels);
        adam.step(model, grads);
      } catch (const ValidationError&) {
        diverged = true;
        break;
      }
      if (!all_params_finite(model)) {
        diverged = true;
        break;
      }
    }
    if (diverged) {
      model = checkpoint;  // last epoch that finished with finite parameters
      report.diverged = true;
      break;
    }
    report.epochs.push_back(evaluate(model, full_batch, labels));
    model.epochs_trained = epoch + 1;
    checkpoint = model;
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(report)};
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  const auto n_rows = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index n_cols = n_rows > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXd m(n_rows, n_cols);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    for (Eigen::Index j = 0; j < n_cols; ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
    }
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

json config_to_json(const TrainConfig& config) {
  return {{"epochs", config.epochs},
          {"learning_rate", config.learning_rate},
          {"batch_size", config.batch_size},
          {"hidden", config.hidden},
          {"seed", config.seed},
          {"mode", std::string(aggregation_mode_name(config.mode))},
          {"adam_beta1", config.adam_beta1},
          {"adam_beta2", config.adam_beta2},
          {"adam_epsilon", config.adam_epsilon}};
}

TrainConfig config_from_json(const json& doc) {
  TrainConfig config;
  config.epochs = doc.at("epochs").get<int>();
  config.learning_rate = doc.at("learning_rate").get<double>();
  config.batch_size = doc.at("batch_size").get<int>();
  config.hidden = doc.at("hidden").get<int>();
  config.seed = doc.at("seed").get<std::uint64_t>();
  config.mode = aggregation_mode_from_name(doc.at("mode").get<std::string>());
  config.adam_beta1 = doc.at("adam_beta1").get<double>();
  config.adam_beta2 = doc.at("adam_beta2").get<double>();
  config.adam_epsilon = doc.at("adam_epsilon").get<double>();
  return config;
}

}  // namespace

std::string model_to_json_string(const CneModel& model) {
  json doc;
  doc["format_version"] = 1;
  doc["dims"] = {{"input_dim", model.input_dim},
                 {"edge_dim", model.edge_dim},
                 {"hidden", model.hidden},
                 {"classes", model.classes}};
  doc["mode"] = std::string(aggregation_mode_name(model.mode));
  doc["seed"] = model.seed;
  doc["epochs_trained"] = model.epochs_trained;
  doc["config"] = config_to_json(model.trained_config);
  doc["metadata"] = model.metadata;
  doc["params"] = {{"layer1",
                    {{"w_self", matrix_to_json(model.layer1.w_self)},
                     {"w_nbr", matrix_to_json(model.layer1.w_nbr)},
                     {"bias", vector_to_json(model.layer1.bias)}}},
                   {"layer2",
                    {{"w_self", matrix_to_json(model.layer2.w_self)},
                     {"w_nbr", matrix_to_json(model.layer2.w_nbr)},
                     {"bias", vector_to_json(model.layer2.bias)}}},
                   {"prelu1", model.prelu1},
                   {"prelu2", model.prelu2},
                   {"head_w", matrix_to_json(model.head_w)},
                   {"head_b", vector_to_json(model.head_b)}};
  return doc.dump() + "\n";
}

CneModel model_from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON parse failure: ") + e.what(), text);
  }
  CneModel model;
  model.input_dim = doc.at("dims").at("input_dim").get<int>();
  model.edge_dim = doc.at("dims").at("edge_dim").get<int>();
  model.hidden = doc.at("dims").at("hidden").get<int>();
  model.classes = doc.at("dims").at("classes").get<int>();
  model.mode = aggregation_mode_from_name(doc.at("mode").get<std::string>());
  model.seed = doc.at("seed").get<std::uint64_t>();
  model.epochs_trained = doc.at("epochs_trained").get<int>();
  model.trained_config = config_from_json(doc.at("config"));
  model.metadata = doc.at("metadata").get<std::map<std::string, std::string>>();
  const json& params = doc.at("params");
  model.layer1.w_self = matrix_from_json(params.at("layer1").at("w_self"));
  model.layer1.w_nbr = matrix_from_json(params.at("layer1").at("w_nbr"));
  model.layer1.bias = vector_from_json(params.at("layer1").at("bias"));
  model.layer2.w_self = matrix_from_json(params.at("layer2").at("w_self"));
  model.layer2.w_nbr = matrix_from_json(params.at("layer2").at("w_nbr"));
  model.layer2.bias = vector_from_json(params.at("layer2").at("bias"));
  model.prelu1 = params.at("prelu1").get<double>();
  model.prelu2 = params.at("prelu2").get<double>();
  model.head_w = matrix_from_json(params.at("head_w"));
  model.head_b = vector_from_json(params.at("head_b"));
  return model;
}

std::string train_report_to_csv_string(const TrainReport& report) {
  std::ostringstream out;
  out << "epoch,loss,accuracy\n";
  char buf[64];
  for (std::size_t i = 0; i < report.epochs.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i + 1, report.epochs[i].loss,
                  report.epochs[i].accuracy);
    out << buf;
  }
  return out.str();
}

std::string train_report_to_json_string(const TrainReport& report) {
  json doc;
  doc["seed"] = report.seed;
  doc["config"] = config_to_json(report.config);
  doc["wall_seconds"] = report.wall_seconds;
  doc["diverged"] = report.diverged;
  doc["epochs_completed"] = report.epochs.size();
  if (!report.epochs.empty()) {
    doc["final_loss"] = report.epochs.back().loss;
    doc["final_accuracy"] = report.epochs.back().accuracy;
  }
  return doc.dump(2) + "\n";
}

}  // namespace cne
