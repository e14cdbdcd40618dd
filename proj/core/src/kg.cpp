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

#include "cne/kg.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cne/errors.hpp"

namespace cne {

using nlohmann::json;

namespace {

// Return the balanced {...} starting at `start`, or empty if unbalanced.
std::string_view balanced_object(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      --depth;
      if (depth == 0) return text.substr(start, i - start + 1);
    }
  }
  return {};
}

// Tolerant pre-pass: prefer fenced content, then scan every '{' until one
// yields a balanced object that parses. LLMs wrap their JSON in prose and
// markdown; the strict schema check happens afterwards.
json extract_json_object(std::string_view raw) {
  std::string_view search = raw;
  const std::size_t fence = raw.find("```");
  if (fence != std::string_view::npos) {
    std::size_t body = raw.find('\n', fence);
    if (body != std::string_view::npos) {
      const std::size_t close = raw.find("```", body);
      if (close != std::string_view::npos) {
        search = raw.substr(body + 1, close - body - 1);
      }
    }
  }

  for (std::size_t pos = search.find('{'); pos != std::string_view::npos;
       pos = search.find('{', pos + 1)) {
    const std::string_view candidate = balanced_object(search, pos);
    if (candidate.empty()) continue;
    try {
      return json::parse(candidate);
    } catch (const json::exception&) {
      // Stray brace in prose; keep scanning.
    }
  }
  throw ParseError("no parsable JSON object in response", std::string(raw));
}

std::string require_string(const json& obj, const char* field, std::string_view raw) {
  if (!obj.contains(field) || !obj.at(field).is_string()) {
    throw ParseError(std::string("missing or non-string field: ") + field, std::string(raw));
  }
  return obj.at(field).get<std::string>();
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

bool bare_dot_id(std::string_view name) {
  if (name.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_') return false;
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

std::string dot_id(std::string_view name) {
  if (bare_dot_id(name)) return std::string(name);
  std::string out = "\"";
  for (char c : name) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_importance(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

}  // namespace

KnowledgeSubgraph parse_kg_json(std::string_view raw, std::string conversation_id) {
  if (raw.empty()) throw ParseError("empty response", std::string(raw));
  const json doc = extract_json_object(raw);
  if (!doc.is_object()) throw ParseError("top-level JSON is not an object", std::string(raw));

  KnowledgeSubgraph subgraph;
  subgraph.conversation_id = std::move(conversation_id);

  if (doc.contains("entities")) {
    if (!doc.at("entities").is_array()) throw ParseError("entities is not an array", std::string(raw));
    for (const auto& item : doc.at("entities")) {
      Entity entity;
      entity.name = require_string(item, "name", raw);
      if (entity.name.empty()) throw ParseError("entity with empty name", std::string(raw));
      entity.entity_type =
          item.contains("type") && item.at("type").is_string() && !item.at("type").get<std::string>().empty()
              ? item.at("type").get<std::string>()
              : "unknown";
      subgraph.entities.push_back(std::move(entity));
    }
  }
  if (doc.contains("relations")) {
    if (!doc.at("relations").is_array()) throw ParseError("relations is not an array", std::string(raw));
    for (const auto& item : doc.at("relations")) {
      Triple triple;
      triple.subject = require_string(item, "subject", raw);
      triple.object = require_string(item, "object", raw);
      triple.predicate = require_string(item, "predicate", raw);
      if (triple.subject.empty() || triple.object.empty() || triple.predicate.empty()) {
        throw ParseError("relation with empty member", std::string(raw));
      }
      subgraph.triples.push_back(std::move(triple));
    }
  }
  if (subgraph.entities.empty() && subgraph.triples.empty()) {
    throw ParseError("knowledge graph has no entities and no relations", std::string(raw));
  }
  return subgraph;
}

std::pair<KnowledgeSubgraph, RepairReport> repair(const KnowledgeSubgraph& subgraph) {
  KnowledgeSubgraph repaired;
  repaired.conversation_id = subgraph.conversation_id;
  RepairReport report;

  std::set<std::string> names;
  for (const auto& entity : subgraph.entities) {
    if (names.insert(entity.name).second) {
      repaired.entities.push_back(entity);
    } else {
      ++report.entities_deduped;
      report.notes.push_back("deduped entity: " + entity.name);
    }
  }

  std::set<Triple> seen;
  for (const auto& triple : subgraph.triples) {
    if (!seen.insert(triple).second) {
      ++report.triples_deduped;
      report.notes.push_back("deduped triple: " + triple.subject + " -" + triple.predicate + "-> " +
                             triple.object);
      continue;
    }
    for (const std::string* endpoint : {&triple.subject, &triple.object}) {
      if (names.insert(*endpoint).second) {
        repaired.entities.push_back({*endpoint, "unknown"});
        ++report.entities_added;
        report.notes.push_back("materialized dangling endpoint: " + *endpoint);
      }
    }
    repaired.triples.push_back(triple);
  }
  return {std::move(repaired), std::move(report)};
}

CommunityGraph merge(std::string community, std::vector<KnowledgeSubgraph> subgraphs) {
  std::sort(subgraphs.begin(), subgraphs.end(),
            [](const KnowledgeSubgraph& a, const KnowledgeSubgraph& b) {
              return a.conversation_id < b.conversation_id;
            });
  for (std::size_t i = 1; i < subgraphs.size(); ++i) {
    if (subgraphs[i].conversation_id == subgraphs[i - 1].conversation_id) {
      throw ValidationError("merge: duplicate conversation_id " + subgraphs[i].conversation_id);
    }
  }

  CommunityGraph graph;
  graph.community = std::move(community);

  std::map<std::string, std::set<std::string>> node_types;
  for (const auto& subgraph : subgraphs) {
    for (const auto& entity : subgraph.entities) {
      node_types[entity.name].insert(entity.entity_type);
    }
    for (const auto& triple : subgraph.triples) {
      graph.merged_edges.push_back({triple, subgraph.conversation_id});
    }
  }
  for (auto& [name, types] : node_types) {
    graph.merged_nodes.push_back({name, {types.begin(), types.end()}});
  }
  std::sort(graph.merged_edges.begin(), graph.merged_edges.end(),
            [](const MergedEdge& a, const MergedEdge& b) {
              return std::tie(a.conversation_id, a.triple) < std::tie(b.conversation_id, b.triple);
            });
  graph.subgraphs = std::move(subgraphs);
  return graph;
}

std::string to_dot(const KnowledgeSubgraph& subgraph, const MaskOverlay* overlay) {
  std::ostringstream out;
  out << "digraph " << dot_id(subgraph.conversation_id) << " {\n";
  for (const auto& entity : subgraph.entities) {
    out << "  " << dot_id(entity.name) << " [type=\"" << entity.entity_type << "\"";
    if (overlay != nullptr) {
      const auto importance = overlay->node_importance.find(entity.name);
      if (importance != overlay->node_importance.end()) {
        out << ", importance=\"" << format_importance(importance->second) << "\"";
      }
    }
    out << "];\n";
    if (overlay != nullptr && overlay->masked_nodes.count(entity.name) > 0) {
      out << "  " << dot_id(entity.name) << " [color=red];\n";
    }
  }
  for (std::size_t i = 0; i < subgraph.triples.size(); ++i) {
    const Triple& triple = subgraph.triples[i];
    out << "  " << dot_id(triple.subject) << " -> " << dot_id(triple.object) << " [label="
        << dot_id(triple.predicate);
    if (overlay != nullptr && i < overlay->edge_importance.size()) {
      out << ", importance=\"" << format_importance(overlay->edge_importance[i]) << "\"";
    }
    if (overlay != nullptr && overlay->masked_edges.count(i) > 0) {
      out << ", style=dashed";
    }
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

namespace {

void graphml_header(std::ostringstream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\"\n"
      << "         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\"\n"
      << "         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns"
      << " http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n";
}

}  // namespace

std::string to_graphml(const KnowledgeSubgraph& subgraph, const MaskOverlay* overlay) {
  std::ostringstream out;
  graphml_header(out);
  out << "  <key id=\"d_name\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n"
      << "  <key id=\"d_type\" for=\"node\" attr.name=\"entity_type\" attr.type=\"string\"/>\n"
      << "  <key id=\"d_nimp\" for=\"node\" attr.name=\"importance\" attr.type=\"double\"/>\n"
      << "  <key id=\"d_nmask\" for=\"node\" attr.name=\"masked\" attr.type=\"boolean\"/>\n"
      << "  <key id=\"d_pred\" for=\"edge\" attr.name=\"predicate\" attr.type=\"string\"/>\n"
      << "  <key id=\"d_eimp\" for=\"edge\" attr.name=\"importance\" attr.type=\"double\"/>\n"
      << "  <key id=\"d_emask\" for=\"edge\" attr.name=\"masked\" attr.type=\"boolean\"/>\n"
      << "  <graph id=\"" << xml_escape(subgraph.conversation_id)
      << "\" edgedefault=\"directed\">\n";

  std::map<std::string, std::size_t> node_ids;
  for (std::size_t i = 0; i < subgraph.entities.size(); ++i) {
    const Entity& entity = subgraph.entities[i];
    node_ids[entity.name] = i;
    out << "    <node id=\"n" << i << "\">\n"
        << "      <data key=\"d_name\">" << xml_escape(entity.name) << "</data>\n"
        << "      <data key=\"d_type\">" << xml_escape(entity.entity_type) << "</data>\n";
    if (overlay != nullptr) {
      const auto importance = overlay->node_importance.find(entity.name);
      if (importance != overlay->node_importance.end()) {
        out << "      <data key=\"d_nimp\">" << format_importance(importance->second)
            << "</data>\n";
      }
      out << "      <data key=\"d_nmask\">"
          << (overlay->masked_nodes.count(entity.name) > 0 ? "true" : "false") << "</data>\n";
    }
    out << "    </node>\n";
  }
  for (std::size_t i = 0; i < subgraph.triples.size(); ++i) {
    const Triple& triple = subgraph.triples[i];
    out << "    <edge id=\"e" << i << "\" source=\"n" << node_ids.at(triple.subject)
        << "\" target=\"n" << node_ids.at(triple.object) << "\">\n"
        << "      <data key=\"d_pred\">" << xml_escape(triple.predicate) << "</data>\n";
    if (overlay != nullptr && i < overlay->edge_importance.size()) {
      out << "      <data key=\"d_eimp\">" << format_importance(overlay->edge_importance[i])
          << "</data>\n";
    }
    if (overlay != nullptr) {
      out << "      <data key=\"d_emask\">" << (overlay->masked_edges.count(i) > 0 ? "true" : "false")
          << "</data>\n";
    }
    out << "    </edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
  return out.str();
}

std::string to_dot(const CommunityGraph& graph) {
  std::ostringstream out;
  out << "digraph " << dot_id(graph.community) << " {\n";
  for (const auto& node : graph.merged_nodes) {
    out << "  " << dot_id(node.name) << ";\n";
  }
  for (const auto& edge : graph.merged_edges) {
    out << "  " << dot_id(edge.triple.subject) << " -> " << dot_id(edge.triple.object)
        << " [label=" << dot_id(edge.triple.predicate) << ", conversation=\""
        << edge.conversation_id << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string to_graphml(const CommunityGraph& graph) {
  std::ostringstream out;
  graphml_header(out);
  out << "  <key id=\"d_name\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n"
      << "  <key id=\"d_types\" for=\"node\" attr.name=\"entity_types\" attr.type=\"string\"/>\n"
      << "  <key id=\"d_pred\" for=\"edge\" attr.name=\"predicate\" attr.type=\"string\"/>\n"
      << "  <key id=\"d_conv\" for=\"edge\" attr.name=\"conversation\" attr.type=\"string\"/>\n"
      << "  <graph id=\"" << xml_escape(graph.community) << "\" edgedefault=\"directed\">\n";
  std::map<std::string, std::size_t> node_ids;
  for (std::size_t i = 0; i < graph.merged_nodes.size(); ++i) {
    const MergedNode& node = graph.merged_nodes[i];
    node_ids[node.name] = i;
    std::string types;
    for (const auto& t : node.types) {
      if (!types.empty()) types += ";";
      types += t;
    }
    out << "    <node id=\"n" << i << "\">\n"
        << "      <data key=\"d_name\">" << xml_escape(node.name) << "</data>\n"
        << "      <data key=\"d_types\">" << xml_escape(types) << "</data>\n"
        << "    </node>\n";
  }
  for (std::size_t i = 0; i < graph.merged_edges.size(); ++i) {
    const MergedEdge& edge = graph.merged_edges[i];
    out << "    <edge id=\"e" << i << "\" source=\"n" << node_ids.at(edge.triple.subject)
        << "\" target=\"n" << node_ids.at(edge.triple.object) << "\">\n"
        << "      <data key=\"d_pred\">" << xml_escape(edge.triple.predicate) << "</data>\n"
        << "      <data key=\"d_conv\">" << xml_escape(edge.conversation_id) << "</data>\n"
        << "    </edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
  return out.str();
}

std::string subgraph_to_json_string(const KnowledgeSubgraph& subgraph) {
  json doc;
  doc["conversation_id"] = subgraph.conversation_id;
  doc["entities"] = json::array();
  for (const auto& entity : subgraph.entities) {
    doc["entities"].push_back({{"name", entity.name}, {"type", entity.entity_type}});
  }
  doc["relations"] = json::array();
  for (const auto& triple : subgraph.triples) {
    doc["relations"].push_back({{"subject", triple.subject},
                                {"object", triple.object},
                                {"predicate", triple.predicate}});
  }
  return doc.dump(2) + "\n";
}

KnowledgeSubgraph subgraph_from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("subgraph JSON parse failure: ") + e.what(), text);
  }
  const std::string conversation_id =
      doc.contains("conversation_id") ? doc.at("conversation_id").get<std::string>() : "";
  return parse_kg_json(text, conversation_id);
}

std::string community_graph_to_json_string(const CommunityGraph& graph) {
  json doc;
  doc["community"] = graph.community;
  doc["subgraph_ids"] = json::array();
  for (const auto& subgraph : graph.subgraphs) doc["subgraph_ids"].push_back(subgraph.conversation_id);
  doc["nodes"] = json::array();
  for (const auto& node : graph.merged_nodes) {
    doc["nodes"].push_back({{"name", node.name}, {"types", node.types}});
  }
  doc["edges"] = json::array();
  for (const auto& edge : graph.merged_edges) {
    doc["edges"].push_back({{"subject", edge.triple.subject},
                            {"predicate", edge.triple.predicate},
                            {"object", edge.triple.object},
                            {"conversation_id", edge.conversation_id}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace cne
