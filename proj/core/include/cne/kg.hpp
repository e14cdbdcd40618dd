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

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cne {

struct Entity {
  std::string name;
  std::string entity_type;  // free-form; "unknown" when materialized by repair

  friend bool operator==(const Entity&, const Entity&) = default;
};

struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// Per-conversation open-information-extraction graph. Edges run
/// subject -> object, labeled by predicate.
struct KnowledgeSubgraph {
  std::string conversation_id;
  std::vector<Entity> entities;
  std::vector<Triple> triples;

  friend bool operator==(const KnowledgeSubgraph&, const KnowledgeSubgraph&) = default;
};

struct RepairReport {
  std::size_t entities_added = 0;    // dangling endpoints materialized
  std::size_t entities_deduped = 0;  // exact-name duplicates merged
  std::size_t triples_deduped = 0;   // identical triples removed
  std::vector<std::string> notes;

  bool empty() const { return entities_added == 0 && entities_deduped == 0 && triples_deduped == 0; }
};

/// Parse an LLM response into a subgraph. A tolerant pre-pass strips markdown
/// code fences and prose around the outermost JSON object before the strict
/// parse. Unrecoverable input raises ParseError carrying the raw text.
KnowledgeSubgraph parse_kg_json(std::string_view raw, std::string conversation_id);

/// Total repair pass: dangling triple endpoints become {name, "unknown"}
/// entities, duplicate entities and identical triples are removed.
/// Idempotent: repairing a repaired graph reports nothing.
std::pair<KnowledgeSubgraph, RepairReport> repair(const KnowledgeSubgraph& subgraph);

struct MergedNode {
  std::string name;
  std::vector<std::string> types;  // sorted distinct types observed

  friend bool operator==(const MergedNode&, const MergedNode&) = default;
};

struct MergedEdge {
  Triple triple;
  std::string conversation_id;  // provenance

  friend bool operator==(const MergedEdge&, const MergedEdge&) = default;
};

struct CommunityGraph {
  std::string community;
  std::vector<KnowledgeSubgraph> subgraphs;
  std::vector<MergedNode> merged_nodes;  // exact-string union, sorted by name
  std::vector<MergedEdge> merged_edges;  // canonical order
};

/// Merge repaired subgraphs into the community graph. Node set is the
/// exact-string union; edges keep provenance; associative and
/// order-insensitive up to the canonical sort.
CommunityGraph merge(std::string community, std::vector<KnowledgeSubgraph> subgraphs);

/// Mask overlay supplied by the explainer when rendering explanations.
struct MaskOverlay {
  std::set<std::string> masked_nodes;
  std::set<std::size_t> masked_edges;  // indices into the subgraph triple list
  std::map<std::string, double> node_importance;
  std::vector<double> edge_importance;
};

// DOT: masked nodes get color=red, masked edges style=dashed.
// GraphML: importances and mask flags ride along as typed attributes.
std::string to_dot(const KnowledgeSubgraph& subgraph, const MaskOverlay* overlay = nullptr);
std::string to_graphml(const KnowledgeSubgraph& subgraph, const MaskOverlay* overlay = nullptr);
std::string to_dot(const CommunityGraph& graph);
std::string to_graphml(const CommunityGraph& graph);

std::string subgraph_to_json_string(const KnowledgeSubgraph& subgraph);
KnowledgeSubgraph subgraph_from_json_string(const std::string& text);
std::string community_graph_to_json_string(const CommunityGraph& graph);

}  // namespace cne
