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

#ifndef TERMFORGE_GRAPH_H_
#define TERMFORGE_GRAPH_H_

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "termforge/corpus.h"
#include "termforge/embedding.h"

namespace termforge {

struct EntityRef {
  std::string canonical_id;
  std::string surface;

  static EntityRef from(const EntityMention& m) { return {m.key(), m.surface}; }
  auto operator<=>(const EntityRef&) const = default;
};

enum class SenEdgeReason { kSharedEntity, kSameCategory };

std::string_view reason_name(SenEdgeReason reason);

struct SenEdge {
  SenEdgeReason reason;
  friend bool operator==(const SenEdge&, const SenEdge&) = default;
};

// anchor_entity belongs to the node whose adjacency list holds the edge.
struct TokEdge {
  EntityRef anchor_entity;
  EntityRef other_entity;
  double similarity = 0.0;
  friend bool operator==(const TokEdge&, const TokEdge&) = default;
};

using EdgeKind = std::variant<SenEdge, TokEdge>;

struct Edge {
  std::string neighbor;
  EdgeKind kind;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct GraphThresholds {
  double theta_tok = 0.8;
  double theta_sen = 0.7;
};

class SentenceGraph {
 public:
  SentenceGraph() = default;
  SentenceGraph(std::vector<std::string> node_ids, GraphThresholds thresholds);

  const std::vector<std::string>& node_ids() const { return node_ids_; }
  const GraphThresholds& thresholds() const { return thresholds_; }
  bool contains(std::string_view id) const;
  // Edges incident to `id`, in insertion order. Throws for unknown ids.
  const std::vector<Edge>& edges(std::string_view id) const;

  // Adds (a, b, kind) and its mirror (b, a, mirrored kind).
  void connect(std::string_view a, std::string_view b, const EdgeKind& kind);

 private:
  std::vector<std::string> node_ids_;
  GraphThresholds thresholds_;
  std::map<std::string, std::vector<Edge>, std::less<>> adjacency_;
};

// All-pairs construction. same_category edges join only sentences in the
// same split; shared_entity and token edges ignore splits.
SentenceGraph build_graph(const Corpus& corpus,
                          const EmbeddingProvider& provider,
                          GraphThresholds thresholds);

struct CandidateSets {
  // Sorted by descending sentence similarity, then corpus order.
  std::vector<std::string> s_sen;
  std::vector<double> s_sen_similarity;
  // Anchor entity -> confusable entities, deduplicated and sorted.
  std::map<EntityRef, std::vector<EntityRef>> c_tok;
};

// Candidates for one anchor. When the corpus is split, neighbours from the
// other split are skipped so augmentation never mixes splits.
CandidateSets candidate_sets(const SentenceGraph& graph, const Corpus& corpus,
                             std::string_view anchor,
                             const EmbeddingProvider& provider,
                             double theta_sen);

struct GraphStats {
  std::size_t nodes = 0;
  std::size_t shared_entity_edges = 0;
  std::size_t same_category_edges = 0;
  std::size_t tok_edges = 0;
  std::map<std::size_t, std::size_t> degree_histogram;  // degree -> nodes
};

GraphStats graph_stats(const SentenceGraph& graph);

// One JSON object per undirected edge, src before dst in node order.
std::string export_graph_jsonl(const SentenceGraph& graph);
SentenceGraph import_graph_jsonl(std::string_view jsonl,
                                 std::vector<std::string> node_ids,
                                 GraphThresholds thresholds);

}  // namespace termforge

#endif  // TERMFORGE_GRAPH_H_
