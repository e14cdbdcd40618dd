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

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "cne/kg.hpp"
#include "cne/nli.hpp"  // HttpProviderOptions

namespace cne {

/// Text-embedding contract: embed() always returns exactly `dimension()`
/// finite values and is deterministic for a fixed configuration. Inputs are
/// truncated to the first `max_tokens()` whitespace tokens.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  virtual bool remote() const { return false; }
  virtual std::size_t dimension() const = 0;
  virtual std::size_t max_tokens() const { return 256; }
  virtual Eigen::VectorXd embed(std::string_view text) = 0;
};

/// Deterministic feature-hashing fallback: lowercase whitespace tokens, each
/// hashed to a signed bucket in [0, d), summed, then L2-normalized. An
/// all-zero accumulation falls back to the unit basis vector e0.
class HashEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit HashEmbeddingProvider(std::size_t dimension = 64, std::size_t max_tokens = 256);

  std::string id() const override;
  std::size_t dimension() const override { return dimension_; }
  std::size_t max_tokens() const override { return max_tokens_; }
  Eigen::VectorXd embed(std::string_view text) override;

 private:
  std::size_t dimension_;
  std::size_t max_tokens_;
};

/// Remote encoder endpoint: POST {texts: [...]} -> {vectors: [[...], ...]}.
std::unique_ptr<EmbeddingProvider> make_http_embedding_provider(std::string id,
                                                                std::size_t dimension,
                                                                std::size_t max_tokens,
                                                                HttpProviderOptions options);

/// Shared text-hash-keyed cache wrapper with serialized writes.
class CachedEmbeddingProvider : public EmbeddingProvider {
 public:
  CachedEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner,
                          std::filesystem::path cache_dir, bool offline = false);

  std::string id() const override;
  bool remote() const override;
  std::size_t dimension() const override;
  std::size_t max_tokens() const override;
  Eigen::VectorXd embed(std::string_view text) override;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

/// Concatenation embed(subject) then embed(object); length exactly 2d.
Eigen::VectorXd edge_feature(const Triple& triple, EmbeddingProvider& provider);

/// Node rows follow entity first-appearance order, edge rows follow triple
/// listing order. node_features is |V| x d, edge_features is |E| x 2d.
struct FeatureMatrix {
  std::string subgraph_id;
  std::size_t dimension = 0;
  std::string provider_id;
  Eigen::MatrixXd node_features;
  Eigen::MatrixXd edge_features;
  std::map<std::string, int> node_index;  // entity name -> row
};

FeatureMatrix featurize_subgraph(const KnowledgeSubgraph& subgraph, EmbeddingProvider& provider);

std::string feature_matrix_to_json_string(const FeatureMatrix& matrix);
FeatureMatrix feature_matrix_from_json_string(const std::string& text);

}  // namespace cne
