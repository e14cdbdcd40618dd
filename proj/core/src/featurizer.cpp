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

#include "cne/featurizer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <json.hpp>

#include "cne/cache.hpp"
#include "cne/errors.hpp"
#include "cne/hashing.hpp"
#include "cne/io.hpp"

namespace cne {

using nlohmann::json;

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dimension, std::size_t max_tokens)
    : dimension_(dimension), max_tokens_(max_tokens) {
  if (dimension_ == 0) throw ValidationError("embedding dimension must be positive");
  if (max_tokens_ == 0) throw ValidationError("max_tokens must be positive");
}

std::string HashEmbeddingProvider::id() const {
  return "hash-d" + std::to_string(dimension_) + "-t" + std::to_string(max_tokens_);
}

Eigen::VectorXd HashEmbeddingProvider::embed(std::string_view text) {
  if (text.empty()) throw ValidationError("embed: empty text");
  Eigen::VectorXd vec = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension_));

  // Token = whitespace-delimited word, lowercased. Bucket comes from the low
  // hash bits, the sign from bit 32 so it is independent of the bucket.
  std::size_t tokens_used = 0;
  std::string token;
  auto flush_token = [&]() {
    if (token.empty() || tokens_used >= max_tokens_) {
      token.clear();
      return;
    }
    ++tokens_used;
    const std::uint64_t h = fnv1a64(token);
    const auto bucket = static_cast<Eigen::Index>(h % dimension_);
    const double sign = ((h >> 32) & 1ULL) != 0 ? 1.0 : -1.0;
    vec[bucket] += sign;
    token.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush_token();
    } else {
      token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  flush_token();

  const double norm = vec.norm();
  if (norm == 0.0) {
    vec.setZero();
    vec[0] = 1.0;  // zero-vector guard: unit basis e0
    return vec;
  }
  return vec / norm;
}

struct CachedEmbeddingProvider::Impl {
  std::shared_ptr<EmbeddingProvider> inner;
  JsonFileCache cache;
  bool offline = false;

  Impl(std::shared_ptr<EmbeddingProvider> p, std::filesystem::path dir, bool off)
      : inner(std::move(p)), cache(std::move(dir)), offline(off) {}
};

CachedEmbeddingProvider::CachedEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner,
                                                 std::filesystem::path cache_dir, bool offline)
    : impl_(std::make_shared<Impl>(std::move(inner), std::move(cache_dir), offline)) {}

std::string CachedEmbeddingProvider::id() const { return impl_->inner->id(); }
bool CachedEmbeddingProvider::remote() const { return impl_->inner->remote(); }
std::size_t CachedEmbeddingProvider::dimension() const { return impl_->inner->dimension(); }
std::size_t CachedEmbeddingProvider::max_tokens() const { return impl_->inner->max_tokens(); }

Eigen::VectorXd CachedEmbeddingProvider::embed(std::string_view text) {
  const std::string key =
      content_hash("embed\x1f" + impl_->inner->id() + "\x1f" + std::string(text));
  if (const auto entry = impl_->cache.get(key)) {
    const json doc = json::parse(*entry);
    const auto& values = doc.at("vector");
    Eigen::VectorXd vec(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
      vec[static_cast<Eigen::Index>(i)] = values[i].get<double>();
    }
    return vec;
  }
  if (impl_->offline && impl_->inner->remote()) {
    throw OfflineError("embedding cache miss for remote provider " + impl_->inner->id() +
                       " while offline");
  }
  const Eigen::VectorXd vec = impl_->inner->embed(text);
  json doc;
  doc["provider"] = impl_->inner->id();
  doc["text"] = std::string(text);
  doc["vector"] = json::array();
  for (Eigen::Index i = 0; i < vec.size(); ++i) doc["vector"].push_back(vec[i]);
  doc["timestamp"] = utc_timestamp_now();
  impl_->cache.put(key, doc.dump() + "\n");
  return vec;
}

Eigen::VectorXd edge_feature(const Triple& triple, EmbeddingProvider& provider) {
  if (triple.subject.empty() || triple.object.empty()) {
    throw ValidationError("edge_feature: triple endpoints must be non-empty");
  }
  const Eigen::VectorXd subject = provider.embed(triple.subject);
  const Eigen::VectorXd object = provider.embed(triple.object);
  Eigen::VectorXd feature(subject.size() + object.size());
  feature << subject, object;
  return feature;
}

FeatureMatrix featurize_subgraph(const KnowledgeSubgraph& subgraph, EmbeddingProvider& provider) {
  const auto d = static_cast<Eigen::Index>(provider.dimension());
  FeatureMatrix matrix;
  matrix.subgraph_id = subgraph.conversation_id;
  matrix.dimension = provider.dimension();
  matrix.provider_id = provider.id();

  matrix.node_features.resize(static_cast<Eigen::Index>(subgraph.entities.size()), d);
  for (std::size_t i = 0; i < subgraph.entities.size(); ++i) {
    const Entity& entity = subgraph.entities[i];
    if (matrix.node_index.count(entity.name) > 0) {
      throw ValidationError("featurize_subgraph: duplicate entity (run repair first): " +
                            entity.name);
    }
    matrix.node_index[entity.name] = static_cast<int>(i);
    matrix.node_features.row(static_cast<Eigen::Index>(i)) = provider.embed(entity.name);
  }

  matrix.edge_features.resize(static_cast<Eigen::Index>(subgraph.triples.size()), 2 * d);
  for (std::size_t j = 0; j < subgraph.triples.size(); ++j) {
    matrix.edge_features.row(static_cast<Eigen::Index>(j)) =
        edge_feature(subgraph.triples[j], provider);
  }

  if (!matrix.node_features.allFinite() || !matrix.edge_features.allFinite()) {
    throw ValidationError("featurize_subgraph: non-finite feature values");
  }
  return matrix;
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

Eigen::MatrixXd matrix_from_json(const json& rows, Eigen::Index cols_hint) {
  const auto n_rows = static_cast<Eigen::Index>(rows.size());
  Eigen::Index n_cols = cols_hint;
  if (n_rows > 0) n_cols = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(n_rows, n_cols);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != n_cols) {
      throw ValidationError("feature matrix JSON has ragged rows");
    }
    for (Eigen::Index j = 0; j < n_cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

}  // namespace

std::string feature_matrix_to_json_string(const FeatureMatrix& matrix) {
  json doc;
  doc["subgraph_id"] = matrix.subgraph_id;
  doc["d"] = matrix.dimension;
  doc["provider_id"] = matrix.provider_id;
  doc["node_index"] = matrix.node_index;
  doc["node_features"] = matrix_to_json(matrix.node_features);
  doc["edge_features"] = matrix_to_json(matrix.edge_features);
  return doc.dump() + "\n";
}

FeatureMatrix feature_matrix_from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("feature matrix JSON parse failure: ") + e.what(), text);
  }
  FeatureMatrix matrix;
  matrix.subgraph_id = doc.at("subgraph_id").get<std::string>();
  matrix.dimension = doc.at("d").get<std::size_t>();
  matrix.provider_id = doc.at("provider_id").get<std::string>();
  matrix.node_index = doc.at("node_index").get<std::map<std::string, int>>();
  matrix.node_features =
      matrix_from_json(doc.at("node_features"), static_cast<Eigen::Index>(matrix.dimension));
  matrix.edge_features =
      matrix_from_json(doc.at("edge_features"), static_cast<Eigen::Index>(2 * matrix.dimension));
  return matrix;
}

}  // namespace cne
