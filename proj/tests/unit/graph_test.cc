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
#include <variant>

#include <gtest/gtest.h>

#include "oracles.h"
#include "termforge/errors.h"

namespace termforge {
namespace {

SentenceRecord record(std::string id, std::string text, std::string category,
                      std::vector<std::pair<std::string, std::string>> terms,
                      Split split = Split::kUnassigned) {
  SentenceRecord r;
  r.id = std::move(id);
  r.text = std::move(text);
  r.category = std::move(category);
  r.split = split;
  for (const auto& [surface, cid] : terms) {
    const std::size_t pos = r.text.find(surface);
    EntityMention m;
    m.surface = surface;
    m.start = pos;  // ASCII fixtures: bytes == code points
    m.end = pos + surface.size();
    m.canonical_id = cid;
    r.entities.push_back(std::move(m));
  }
  return r;
}

TEST(Graph, SharedEntityEdge) {
  const Corpus c({record("a", "the T1 term x", "c1", {{"T1 term", "T1"}}),
                  record("b", "a T1 term y", "c2", {{"T1 term", "T1"}})});
  const SentenceGraph g = build_graph(c, HashingProvider(), {});
  ASSERT_EQ(g.edges("a").size(), 1u);
  const Edge& e = g.edges("a")[0];
  EXPECT_EQ(e.neighbor, "b");
  EXPECT_EQ(std::get<SenEdge>(e.kind).reason, SenEdgeReason::kSharedEntity);
}

TEST(Graph, TokenEdgeIffAboveThreshold) {
  HashingProvider p;
  const double sim = cosine(p.embed("supervisor"), p.embed("external supervisor"));
  const Corpus c({record("a", "the supervisor acts", "c1", {{"supervisor", "T1"}}),
                  record("b", "an external supervisor acts", "c2",
                         {{"external supervisor", "T2"}})});
  const SentenceGraph above = build_graph(c, p, {sim - 1e-9, 0.7});
  ASSERT_EQ(above.edges("a").size(), 1u);
  const TokEdge& t = std::get<TokEdge>(above.edges("a")[0].kind);
  EXPECT_EQ(t.similarity, sim);
  EXPECT_EQ(t.anchor_entity.canonical_id, "T1");
  EXPECT_EQ(t.other_entity.canonical_id, "T2");
  const SentenceGraph below = build_graph(c, p, {sim, 0.7});
  EXPECT_TRUE(below.edges("a").empty());
}

TEST(Graph, UnrelatedSentencesHaveNoEdges) {
  const Corpus c({record("a", "alpha", "c1", {}), record("b", "beta", "c2", {}),
                  record("c", "gamma", "c3", {})});
  const GraphStats st = graph_stats(build_graph(c, HashingProvider(), {}));
  EXPECT_EQ(st.shared_entity_edges + st.same_category_edges + st.tok_edges, 0u);
  EXPECT_EQ(st.degree_histogram.at(0), 3u);
}

TEST(Graph, EmptyCorpus) {
  const SentenceGraph g = build_graph(Corpus(), HashingProvider(), {});
  EXPECT_TRUE(g.node_ids().empty());
}

TEST(Graph, SameCategoryOnlyWithinSplit) {
  const Corpus c({record("a", "alpha", "c1", {}, Split::kTrain),
                  record("b", "beta", "c1", {}, Split::kTest)});
  EXPECT_TRUE(build_graph(c, HashingProvider(), {}).edges("a").empty());
}

TEST(Graph, UnknownNodeThrows) {
  const SentenceGraph g = build_graph(Corpus(), HashingProvider(), {});
  EXPECT_THROW(g.edges("nope"), ValidationError);
}

TEST(Candidates, AnchorWithoutEdges) {
  const Corpus c({record("a", "alpha", "c1", {}), record("b", "beta", "c2", {})});
  const SentenceGraph g = build_graph(c, HashingProvider(), {});
  const CandidateSets cs = candidate_sets(g, c, "a", HashingProvider(), 0.1);
  EXPECT_TRUE(cs.s_sen.empty());
  EXPECT_TRUE(cs.c_tok.empty());
  EXPECT_THROW(candidate_sets(g, c, "zz", HashingProvider(), 0.1), ValidationError);
}

TEST(Candidates, NeighbourAboveThetaSen) {
  HashingProvider p;
  const Corpus c({record("a", "the bank shall report", "c1", {}),
                  record("b", "the bank shall report it", "c1", {})});
  const double sim = cosine(p.embed(c.records()[0].text), p.embed(c.records()[1].text));
  ASSERT_GT(sim, 0.85);
  const SentenceGraph g = build_graph(c, p, {});
  EXPECT_EQ(candidate_sets(g, c, "a", p, 0.85).s_sen, std::vector<std::string>{"b"});
  EXPECT_TRUE(candidate_sets(g, c, "a", p, sim).s_sen.empty());
}

TEST(Candidates, CrossSplitNeighboursSkipped) {
  const Corpus c({record("a", "the T1 term x", "c1", {{"T1 term", "T1"}}, Split::kTrain),
                  record("b", "the T1 term x", "c2", {{"T1 term", "T1"}}, Split::kTest)});
  HashingProvider p;
  const SentenceGraph g = build_graph(c, p, {});
  EXPECT_EQ(g.edges("a").size(), 1u);  // shared_entity ignores splits
  EXPECT_TRUE(candidate_sets(g, c, "a", p, 0.1).s_sen.empty());
}

TEST(GraphProperty, MatchesBruteForceOracle) {
  HashingProvider p;
  const GraphThresholds th{0.8, 0.3};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Corpus c = testing::random_corpus(seed, {.max_sentences = 20});
    const SentenceGraph g = build_graph(c, p, th);
    ASSERT_EQ(testing::flatten(g), testing::brute_force_edges(c, p, th)) << seed;
    for (const SentenceRecord& r : c.records()) {
      ASSERT_TRUE(testing::same_candidates(
          candidate_sets(g, c, r.id, p, th.theta_sen),
          testing::brute_force_candidates(c, r.id, p, th)))
          << seed << " " << r.id;
    }
  }
}

TEST(GraphProperty, UndirectedWithoutSelfLoops) {
  HashingProvider p;
  const Corpus c = testing::random_corpus(77, {.max_sentences = 30});
  const auto edges = testing::flatten(build_graph(c, p, {0.8, 0.5}));
  std::multiset<std::tuple<std::string, std::string, std::string>> seen(edges.begin(),
                                                                       edges.end());
  for (const auto& [a, b, kind] : edges) {
    EXPECT_NE(a, b);
    if (kind.starts_with("sen:")) {
      EXPECT_EQ(seen.count({b, a, kind}), seen.count({a, b, kind}));
    }
  }
}

TEST(GraphProperty, RaisingThresholdsNeverAdds) {
  HashingProvider p;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Corpus c = testing::random_corpus(100 + seed, {.max_sentences = 25});
    const SentenceGraph lo = build_graph(c, p, {0.6, 0.2});
    const SentenceGraph hi = build_graph(c, p, {0.85, 0.2});
    EXPECT_LE(graph_stats(hi).tok_edges, graph_stats(lo).tok_edges);
    for (const SentenceRecord& r : c.records()) {
      const auto a = candidate_sets(lo, c, r.id, p, 0.2).s_sen;
      const auto b = candidate_sets(lo, c, r.id, p, 0.5).s_sen;
      EXPECT_LE(b.size(), a.size());
      for (const auto& id : b) EXPECT_NE(std::find(a.begin(), a.end(), id), a.end());
    }
  }
}

TEST(GraphProperty, SenCandidateMembershipIsSymmetric) {
  HashingProvider p;
  const Corpus c = testing::random_corpus(5, {.max_sentences = 30});
  const SentenceGraph g = build_graph(c, p, {0.8, 0.3});
  for (const SentenceRecord& r : c.records()) {
    for (const std::string& other : candidate_sets(g, c, r.id, p, 0.3).s_sen) {
      const auto back = candidate_sets(g, c, other, p, 0.3).s_sen;
      EXPECT_NE(std::find(back.begin(), back.end(), r.id), back.end());
    }
  }
}

TEST(GraphExport, RoundTrip) {
  HashingProvider p;
  const Corpus c = testing::random_corpus(9, {.max_sentences = 15});
  const SentenceGraph g = build_graph(c, p, {0.8, 0.3});
  std::vector<std::string> ids;
  for (const auto& r : c.records()) ids.push_back(r.id);
  const SentenceGraph back = import_graph_jsonl(export_graph_jsonl(g), ids, g.thresholds());
  EXPECT_EQ(testing::flatten(back), testing::flatten(g));
}

TEST(GraphStats, CountsMatchAdjacency) {
  HashingProvider p;
  const Corpus c = testing::random_corpus(12, {.max_sentences = 20});
  const SentenceGraph g = build_graph(c, p, {0.8, 0.3});
  const GraphStats st = graph_stats(g);
  std::size_t directed = 0, nodes = 0;
  for (const auto& id : g.node_ids()) directed += g.edges(id).size();
  for (const auto& [degree, n] : st.degree_histogram) nodes += n;
  EXPECT_EQ(nodes, st.nodes);
  EXPECT_EQ(directed, 2 * (st.shared_entity_edges + st.same_category_edges + st.tok_edges));
}

}  // namespace
}  // namespace termforge
