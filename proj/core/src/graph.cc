// Copyright 2026 The TermForge Authors.
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

#include "termforge/graph.h"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "termforge/errors.h"

namespace termforge {
namespace {

EdgeKind mirrored(const EdgeKind& kind) {
  if (const auto* tok = std::get_if<TokEdge>(&kind)) {
    return TokEdge{tok->other_entity, tok->anchor_entity, tok->similarity};
  }
  return kind;
}

std::vector<EntityRef> unique_entities(const SentenceRecord& r) {
  std::set<EntityRef> seen;
  std::vector<EntityRef> out;
  for (const EntityMention& m : r.entities) {
    EntityRef ref = EntityRef::from(m);
    if (seen.insert(ref).second) out.push_back(std::move(ref));
  }
  return out;
}

bool share_entity(const std::vector<EntityRef>& a,
                  const std::vector<EntityRef>& b) {
  for (const EntityRef& x : a) {
    for (const EntityRef& y : b) {
      if (x.canonical_id == y.canonical_id) return true;
    }
  }
  return false;
}

}  // namespace

std::string_view reason_name(SenEdgeReason reason) {
  return reason == SenEdgeReason::kSharedEntity ? "shared_entity"
                                                : "same_category";
}

SentenceGraph::SentenceGraph(std::vector<std::string> node_ids,
                             GraphThresholds thresholds)
    : node_ids_(std::move(node_ids)), thresholds_(thresholds) {
  for (const std::string& id : node_ids_) {
    if (!adjacency_.emplace(id, std::vector<Edge>{}).second) {
      throw ValidationError("duplicate graph node '" + id + "'");
    }
  }
}

bool SentenceGraph::contains(std::string_view id) const {
  return adjacency_.find(id) != adjacency_.end();
}

const std::vector<Edge>& SentenceGraph::edges(std::string_view id) const {
  auto it = adjacency_.find(id);
  if (it == adjacency_.end()) {
    throw ValidationError("unknown graph node '" + std::string(id) + "'");
  }
  return it->second;
}

void SentenceGraph::connect(std::string_view a, std::string_view b,
                            const EdgeKind& kind) {
  if (a == b) throw ValidationError("self-loop on '" + std::string(a) + "'");
  auto ia = adjacency_.find(a);
  auto ib = adjacency_.find(b);
  if (ia == adjacency_.end() || ib == adjacency_.end()) {
    throw ValidationError("edge endpoint not in graph");
  }
  ia->second.push_back(Edge{std::string(b), kind});
  ib->second.push_back(Edge{std::string(a), mirrored(kind)});
}

SentenceGraph build_graph(const Corpus& corpus,
                          const EmbeddingProvider& provider,
                          GraphThresholds thresholds) {
  const auto& records = corpus.records();
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const SentenceRecord& r : records) ids.push_back(r.id);
  SentenceGraph graph(std::move(ids), thresholds);

  std::vector<std::vector<EntityRef>> entities;
  entities.reserve(records.size());
  std::map<std::string, Vector> surface_embedding;
  for (const SentenceRecord& r : records) {
    entities.push_back(unique_entities(r));
    for (const EntityRef& e : entities.back()) {
      if (!surface_embedding.contains(e.surface)) {
        surface_embedding.emplace(e.surface, provider.embed(e.surface));
      }
    }
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t j = i + 1; j < records.size(); ++j) {
      const SentenceRecord& a = records[i];
      const SentenceRecord& b = records[j];
      if (share_entity(entities[i], entities[j])) {
        graph.connect(a.id, b.id, SenEdge{SenEdgeReason::kSharedEntity});
      }
      if (a.category == b.category && a.split == b.split) {
        graph.connect(a.id, b.id, SenEdge{SenEdgeReason::kSameCategory});
      }
      for (const EntityRef& ea : entities[i]) {
        for (const EntityRef& eb : entities[j]) {
          if (ea.canonical_id == eb.canonical_id) continue;
          const double sim = cosine(surface_embedding.at(ea.surface),
                                    surface_embedding.at(eb.surface));
          if (sim > thresholds.theta_tok) {
            graph.connect(a.id, b.id, TokEdge{ea, eb, sim});
          }
        }
      }
    }
  }
  return graph;
}

CandidateSets candidate_sets(const SentenceGraph& graph, const Corpus& corpus,
                             std::string_view anchor,
                             const EmbeddingProvider& provider,
                             double theta_sen) {
  const std::vector<Edge>& edges = graph.edges(anchor);
  const SentenceRecord& anchor_record = corpus.at(anchor);
  const bool split_aware = corpus.is_split();
  auto same_split = [&](const std::string& id) {
    return !split_aware || corpus.at(id).split == anchor_record.split;
  };

  CandidateSets out;
  std::set<std::string> sen_neighbors;
  std::map<EntityRef, std::set<EntityRef>> tok;
  for (const Edge& e : edges) {
    if (!same_split(e.neighbor)) continue;
    if (std::holds_alternative<SenEdge>(e.kind)) {
      sen_neighbors.insert(e.neighbor);
    } else {
      const TokEdge& t = std::get<TokEdge>(e.kind);
      tok[t.anchor_entity].insert(t.other_entity);
    }
  }

  if (!sen_neighbors.empty()) {
    const Vector anchor_vec = provider.embed(anchor_record.text);
    struct Scored {
      double sim;
      std::size_t index;
      std::string id;
    };
    std::vector<Scored> scored;
    for (const std::string& id : sen_neighbors) {
      const double sim = cosine(provider.embed(corpus.at(id).text), anchor_vec);
      if (sim > theta_sen) scored.push_back({sim, corpus.index_of(id), id});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
      if (a.sim != b.sim) return a.sim > b.sim;
      return a.index < b.index;
    });
    for (Scored& s : scored) {
      out.s_sen.push_back(std::move(s.id));
      out.s_sen_similarity.push_back(s.sim);
    }
  }
  for (auto& [entity, others] : tok) {
    out.c_tok.emplace(entity, std::vector<EntityRef>(others.begin(), others.end()));
  }
  return out;
}

GraphStats graph_stats(const SentenceGraph& graph) {
  GraphStats s;
  s.nodes = graph.node_ids().size();
  for (const std::string& id : graph.node_ids()) {
    std::set<std::string> neighbors;
    for (const Edge& e : graph.edges(id)) {
      neighbors.insert(e.neighbor);
      if (const auto* sen = std::get_if<SenEdge>(&e.kind)) {
        if (sen->reason == SenEdgeReason::kSharedEntity) {
          ++s.shared_entity_edges;
        } else {
          ++s.same_category_edges;
        }
      } else {
        ++s.tok_edges;
      }
    }
    ++s.degree_histogram[neighbors.size()];
  }
  // Each undirected edge was seen from both endpoints.
  s.shared_entity_edges /= 2;
  s.same_category_edges /= 2;
  s.tok_edges /= 2;
  return s;
}

std::string export_graph_jsonl(const SentenceGraph& graph) {
  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < graph.node_ids().size(); ++i) {
    order.emplace(graph.node_ids()[i], i);
  }
  std::string out;
  for (const std::string& src : graph.node_ids()) {
    for (const Edge& e : graph.edges(src)) {
      if (order.at(e.neighbor) < order.at(src)) continue;
      nlohmann::ordered_json j;
      j["src"] = src;
      j["dst"] = e.neighbor;
      if (const auto* sen = std::get_if<SenEdge>(&e.kind)) {
        j["kind"] = "sen";
        j["reason"] = std::string(reason_name(sen->reason));
      } else {
        const TokEdge& t = std::get<TokEdge>(e.kind);
        j["kind"] = "tok";
        j["anchor_entity"] = {{"canonical_id", t.anchor_entity.canonical_id},
                              {"surface", t.anchor_entity.surface}};
        j["other_entity"] = {{"canonical_id", t.other_entity.canonical_id},
                             {"surface", t.other_entity.surface}};
        j["similarity"] = t.similarity;
      }
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

SentenceGraph import_graph_jsonl(std::string_view jsonl,
                                 std::vector<std::string> node_ids,
                                 GraphThresholds thresholds) {
  SentenceGraph graph(std::move(node_ids), thresholds);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    const std::string_view line = jsonl.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      const std::string src = j.at("src").get<std::string>();
      const std::string dst = j.at("dst").get<std::string>();
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "sen") {
        const std::string reason = j.at("reason").get<std::string>();
        if (reason != "shared_entity" && reason != "same_category") {
          throw ValidationError("unknown edge reason '" + reason + "'");
        }
        graph.connect(src, dst,
                      SenEdge{reason == "shared_entity"
                                  ? SenEdgeReason::kSharedEntity
                                  : SenEdgeReason::kSameCategory});
      } else if (kind == "tok") {
        auto ref = [](const nlohmann::json& e) {
          return EntityRef{e.at("canonical_id").get<std::string>(),
                           e.at("surface").get<std::string>()};
        };
        graph.connect(src, dst,
                      TokEdge{ref(j.at("anchor_entity")), ref(j.at("other_entity")),
                              j.at("similarity").get<double>()});
      } else {
        throw ValidationError("unknown edge kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("graph line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  return graph;
}

}  // namespace termforge
