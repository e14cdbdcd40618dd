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
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cne/featurizer.hpp"
#include "cne/kg.hpp"
#include "cne/labels.hpp"

namespace cne {

/// How neighbor messages are formed.
/// EdgeConditioned: messages are the (masked) concatenated subject/object
/// edge features, so the paired-text features enter the network directly.
/// NodeFeature: plain mean aggregation over neighbor node representations,
/// kept behind this switch for ablation.
enum class AggregationMode { EdgeConditioned, NodeFeature };

std::string_view aggregation_mode_name(AggregationMode mode);
AggregationMode aggregation_mode_from_name(std::string_view name);

struct SageParams {
  Eigen::MatrixXd w_self;  // h x in
  Eigen::MatrixXd w_nbr;   // h x message_dim (edge feature width or in)
  Eigen::VectorXd bias;    // h
};

/// Every learnable tensor of the model; gradients reuse the same layout.
struct ParamBlock {
  SageParams layer1;
  SageParams layer2;
  double prelu1 = 0.25;  // learnable negative slope, scalar per layer
  double prelu2 = 0.25;
  Eigen::MatrixXd head_w;  // C x h
  Eigen::VectorXd head_b;  // C
};

/// Mutable view over one tensor, so optimizers and gradient checks can walk
/// every parameter generically.
struct ParamRef {
  std::string name;
  double* data;
  std::size_t size;
};

std::vector<ParamRef> param_refs(ParamBlock& block);
ParamBlock zeros_like(const ParamBlock& block);

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 1e-4;
  int batch_size = 128;
  int hidden = 64;
  std::uint64_t seed = 0;
  AggregationMode mode = AggregationMode::EdgeConditioned;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

struct CneModel : ParamBlock {
  int input_dim = 0;
  int edge_dim = 0;  // width of the edge feature rows (2d)
  int hidden = 0;
  int classes = static_cast<int>(kNeedLabelCount);
  AggregationMode mode = AggregationMode::EdgeConditioned;
  std::uint64_t seed = 0;
  int epochs_trained = 0;
  TrainConfig trained_config;
  std::map<std::string, std::string> metadata;  // e.g. prompt template hashes
};

/// Seeded init: every weight uniform in (-1/sqrt(fan_in), +1/sqrt(fan_in)),
/// PReLU slopes at 0.25.
CneModel init_model(int input_dim, int edge_dim, const TrainConfig& config);

/// Subgraphs packed into one dense problem: node/edge feature rows are
/// concatenated, edges carry packed node row indices, and the membership
/// vector assigns every node to its graph for pooling.
struct Batch {
  std::vector<std::string> subgraph_ids;
  Eigen::MatrixXd node_features;            // N x in
  Eigen::MatrixXd edge_features;            // E x edge_dim, row k belongs to edge k
  std::vector<std::array<int, 2>> edges;    // packed (subject_row, object_row)
  std::vector<int> graph_of_node;           // N, values in [0, num_graphs)
  int num_graphs = 0;

  static Batch pack(const std::vector<const FeatureMatrix*>& features,
                    const std::vector<const KnowledgeSubgraph*>& subgraphs);
};

/// Soft masks in [0,1]; absent masks behave as all-ones. Edge masks scale
/// messages, node masks scale the input node features.
struct Masks {
  Eigen::VectorXd edge;  // E
  Eigen::VectorXd node;  // N
};

// Individual operators, shared with the full forward pass.
Eigen::MatrixXd sage_layer(const Eigen::MatrixXd& node_feats,
                           const std::vector<std::array<int, 2>>& edges,
                           const Eigen::MatrixXd& edge_feats, const SageParams& params,
                           AggregationMode mode, const Eigen::VectorXd* edge_mask = nullptr,
                           const Eigen::VectorXd* node_mask = nullptr);
Eigen::MatrixXd prelu(const Eigen::MatrixXd& x, double slope);
Eigen::MatrixXd global_mean_pool(const Eigen::MatrixXd& node_feats,
                                 const std::vector<int>& graph_of_node, int num_graphs);

/// Per-graph logits: sage -> PReLU -> sage -> PReLU -> mean pool -> linear.
Eigen::MatrixXd forward(const CneModel& model, const Batch& batch, const Masks* masks = nullptr);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

struct Gradients : ParamBlock {
  // Populated only when loss_and_grads is asked for mask gradients.
  Eigen::VectorXd edge_mask;
  Eigen::VectorXd node_mask;
};

/// Mean softmax cross-entropy over the batch plus exact backprop gradients
/// for every parameter (and optionally the masks). Throws on NaN loss.
std::pair<double, Gradients> loss_and_grads(const CneModel& model, const Batch& batch,
                                            const std::vector<int>& labels,
                                            const Masks* masks = nullptr,
                                            bool want_mask_grads = false);

class AdamOptimizer {
 public:
  AdamOptimizer(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);
  void step(ParamBlock& params, ParamBlock& grads);

 private:
  double learning_rate_, beta1_, beta2_, epsilon_;
  long t_ = 0;
  std::optional<ParamBlock> m_;
  std::optional<ParamBlock> v_;
};

struct EpochStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::uint64_t seed = 0;
  TrainConfig config;
  double wall_seconds = 0.0;
  bool diverged = false;  // training aborted at the last good checkpoint
};

/// Full training loop: seeded shuffle every epoch, Adam updates, per-epoch
/// full-pass loss/accuracy. Labels are NeedLabel indices 0..7. On divergence
/// (NaN loss or non-finite parameters) the last finite checkpoint is
/// returned with report.diverged set.
std::pair<CneModel, TrainReport> train(const std::vector<const FeatureMatrix*>& features,
                                       const std::vector<const KnowledgeSubgraph*>& subgraphs,
                                       const std::vector<int>& labels, const TrainConfig& config);

std::string model_to_json_string(const CneModel& model);
CneModel model_from_json_string(const std::string& text);
std::string train_report_to_csv_string(const TrainReport& report);
std::string train_report_to_json_string(const TrainReport& report);

}  // namespace cne
