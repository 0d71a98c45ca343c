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

#include "termforge/augment.h"

#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fake_server.h"
#include "oracles.h"
#include "termforge/errors.h"
#include "termforge/generation.h"
#include "termforge/graph.h"
#include "termforge/parsers.h"

namespace termforge {
namespace {

using testing::FakeResponse;
using testing::FakeServer;

SentenceRecord anchor_record() {
  SentenceRecord r;
  r.id = "a";
  r.text = "The supervisor shall report to the board.";
  r.category = "governance";
  r.split = Split::kTrain;
  r.entities.push_back({"supervisor", 4, 14, "T1"});
  r.entities.push_back({"board", 35, 40, "T2"});
  return r;
}

SentenceRecord neighbour_record() {
  SentenceRecord r;
  r.id = "b";
  r.text = "The director may sign contracts.";
  r.category = "governance";
  r.split = Split::kTrain;
  r.entities.push_back({"director", 4, 12, "T3"});
  return r;
}

TEST(Offline, TokenSampleUsesAnchorVerbatim) {
  const SentenceRecord a = anchor_record();
  const std::vector<EntityRef> conf{{"T9", "external supervisor"}, {"T8", "inspector"},
                                    {"T9", "external supervisor"}};
  const TokenQCA s = generate_token_qca(a, a.entities[0], conf, OfflineGenerator());
  EXPECT_EQ(s.question, "Which term completes: The ____ shall report to the board.?");
  EXPECT_EQ(s.answer, "supervisor");
  EXPECT_EQ(s.declarative, a.text);
  EXPECT_EQ(s.negatives, (std::vector<std::string>{"external supervisor", "inspector"}));
  EXPECT_EQ(s.split, Split::kTrain);
  const TokenQCA capped = generate_token_qca(a, a.entities[0], conf, OfflineGenerator(), 1);
  EXPECT_EQ(capped.negatives.size(), 1u);
  EXPECT_THROW(generate_token_qca(a, a.entities[0], {}, OfflineGenerator()), ValidationError);
}

TEST(Offline, SentenceSampleNegatives) {
  const SentenceRecord a = anchor_record();
  const SentenceRecord b = neighbour_record();
  CandidateSets cands;
  cands.c_tok[EntityRef::from(a.entities[0])] = {{"T9", "external supervisor"}};
  const std::vector<SentenceRecord> s_sen{b};
  const auto out = generate_sentence_qca(a, s_sen, cands, OfflineGenerator());
  ASSERT_EQ(out.size(), 1u);
  const SentenceQCA& s = out[0];
  EXPECT_EQ(s.answer, a.text);
  EXPECT_EQ(s.negatives[0], b.text);
  EXPECT_EQ(s.negatives[1], "The external supervisor shall report to the board.");
  EXPECT_EQ(s.negatives[2], "The supervisor shall not report to the board.");
  EXPECT_EQ(s.question, "In governance, what applies to the supervisor and the board?");
  EXPECT_EQ(s.negative_source_id, "b");
  EXPECT_THROW(generate_sentence_qca(a, {}, cands, OfflineGenerator()), ValidationError);
}

TEST(Offline, SwapFallsBackToNeighbourTerm) {
  EXPECT_EQ(swap_entity(anchor_record(), neighbour_record(), {}),
            "The director shall report to the board.");
  SentenceRecord bare = anchor_record();
  bare.entities.clear();
  EXPECT_EQ(swap_entity(bare, neighbour_record(), {}),
            "The supervisor shall report may sign contracts.");
}

TEST(Offline, NegateClause) {
  EXPECT_EQ(negate_clause("Loans must be approved."), "Loans must not be approved.");
  EXPECT_EQ(negate_clause("Directors approve loans."),
            "It is not the case that directors approve loans.");
}

TEST(Validation, SampleInvariants) {
  TokenQCA t{"q", "debtor", {"creditor"}, "The debtor pays.", "a", Split::kTrain};
  EXPECT_NO_THROW(t.validate());
  t.negatives = {"debtor"};
  EXPECT_THROW(t.validate(), ValidationError);
  t.negatives = {"x", "x"};
  EXPECT_THROW(t.validate(), ValidationError);
  t.negatives = {"x"};
  t.declarative = "Nobody pays.";
  EXPECT_THROW(t.validate(), ValidationError);

  SentenceQCA s{"q", "A b.", {"C.", "D.", "E."}, "a", "b", Split::kTest};
  EXPECT_NO_THROW(s.validate());
  s.negatives[1] = " A   b. ";
  EXPECT_THROW(s.validate(), ValidationError);
  s.negatives[1] = "";
  EXPECT_THROW(s.validate(), ValidationError);
}

class AugmentCorpusTest : public ::testing::Test {
 protected:
  void SetUp() override {
    corpus = testing::random_corpus(31, {.max_sentences = 60});
    graph = build_graph(corpus, provider, {0.6, 0.2});
  }
  HashingProvider provider;
  Corpus corpus;
  SentenceGraph graph;
  AugmentConfig config{.sen_cap = 3, .tok_cap = 2, .max_negatives = 4, .theta_sen = 0.2};
};

TEST_F(AugmentCorpusTest, NoCrossSplitLeakage) {
  const AugmentResult r = augment_corpus(corpus, graph, provider, OfflineGenerator(), config);
  ASSERT_FALSE(r.q_sen.empty());
  ASSERT_FALSE(r.q_tok.empty());
  for (const SentenceQCA& s : r.q_sen) {
    EXPECT_EQ(corpus.at(s.anchor_id).split, s.split);
    EXPECT_EQ(corpus.at(s.negative_source_id).split, s.split);
  }
  for (const TokenQCA& s : r.q_tok) {
    EXPECT_EQ(corpus.at(s.anchor_id).split, s.split);
    EXPECT_LE(s.negatives.size(), 4u);
  }
}

TEST_F(AugmentCorpusTest, PerAnchorCapsHold) {
  const AugmentResult r = augment_corpus(corpus, graph, provider, OfflineGenerator(), config);
  std::map<std::string, std::size_t> sen, tok;
  for (const auto& s : r.q_sen) ++sen[s.anchor_id];
  for (const auto& s : r.q_tok) ++tok[s.anchor_id];
  for (const auto& [id, n] : sen) EXPECT_LE(n, 3u);
  for (const auto& [id, n] : tok) EXPECT_LE(n, 2u);
}

TEST_F(AugmentCorpusTest, DeterministicAcrossWorkerCounts) {
  const AugmentResult one = augment_corpus(corpus, graph, provider, OfflineGenerator(), config);
  AugmentConfig many = config;
  many.workers = 3;
  const AugmentResult three = augment_corpus(corpus, graph, provider, OfflineGenerator(), many);
  EXPECT_EQ(serialize_dataset(one.q_sen, one.q_tok),
            serialize_dataset(three.q_sen, three.q_tok));
}

TEST_F(AugmentCorpusTest, DatasetRoundTrip) {
  const AugmentResult r = augment_corpus(corpus, graph, provider, OfflineGenerator(), config);
  const std::string text = serialize_dataset(r.q_sen, r.q_tok);
  const Dataset back = parse_dataset(text);
  EXPECT_EQ(back.q_sen, r.q_sen);
  EXPECT_EQ(back.q_tok, r.q_tok);
  EXPECT_EQ(serialize_dataset(back.q_sen, back.q_tok), text);
  EXPECT_THROW(parse_dataset("{\"kind\":\"nope\"}\n"), ValidationError);
  EXPECT_THROW(parse_dataset("not json\n"), ValidationError);
}

TEST_F(AugmentCorpusTest, UnsplitCorpusRejected) {
  const Corpus raw = testing::random_corpus(3, {.max_sentences = 10, .split = false});
  const SentenceGraph g = build_graph(raw, provider, {});
  EXPECT_THROW(augment_corpus(raw, g, provider, OfflineGenerator(), config), ValidationError);
}

std::string chat_reply(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}
      .dump();
}

ChatCompletionOptions fast_options(const std::string& url) {
  ChatCompletionOptions o;
  o.endpoint = url;
  o.model = "test-model";
  o.retry.max_retries = 1;
  o.retry.initial_delay = std::chrono::milliseconds(1);
  o.retry.max_delay = std::chrono::milliseconds(1);
  o.retry.request_timeout = std::chrono::milliseconds(2000);
  return o;
}

TEST(Llm, ChatRequestShapeAndTokenSample) {
  std::string seen_body;
  FakeServer server([&](const std::string& body, int) {
    seen_body = body;
    return FakeResponse{200,
                        chat_reply("<Question>: Who reports to the board?\n"
                                   "<Correct Answer>: supervisor\n"
                                   "<Rephrased Sentence>: The supervisor reports to the board.")};
  });
  const ChatCompletionClient client(fast_options(server.url()), "secret");
  const LlmGenerator gen(client, PromptTemplates::defaults());
  const SentenceRecord a = anchor_record();
  const std::vector<EntityRef> conf{{"T9", "external supervisor"}};
  const TokenQCA s = generate_token_qca(a, a.entities[0], conf, gen);
  EXPECT_EQ(s.question, "Who reports to the board?");
  EXPECT_EQ(s.declarative, "The supervisor reports to the board.");
  EXPECT_EQ(s.negatives, std::vector<std::string>{"external supervisor"});
  EXPECT_EQ(server.last_authorization(), "Bearer secret");

  const auto body = nlohmann::json::parse(seen_body);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], render_token_prompt(a, a.entities[0]));
  EXPECT_EQ(body["temperature"], 0.0);
}

TEST(Llm, SentenceSampleReorderedAnswerIsCounted) {
  FakeServer server([](const std::string&, int) {
    return FakeResponse{200, chat_reply("<Question>: Q?\n<Choice A>: W1.\n<Choice B>: Right.\n"
                                        "<Choice C>: W2.\n<Choice D>: W3.\n"
                                        "<Correct Answer>: Right.")};
  });
  const ChatCompletionClient client(fast_options(server.url()), std::nullopt);
  const LlmGenerator gen(client, PromptTemplates::defaults());
  const SentenceQCA s = gen.sentence(anchor_record(), neighbour_record(), {});
  EXPECT_EQ(s.answer, "Right.");
  EXPECT_EQ(s.negatives, (std::array<std::string, 3>{"W1.", "W2.", "W3."}));
  EXPECT_EQ(gen.reordered_outputs(), 1u);
  EXPECT_EQ(server.last_authorization(), "");
}

TEST(Llm, MalformedOutputAndWrongAnswerAreRejected) {
  FakeServer server([](const std::string&, int n) {
    if (n == 0) return FakeResponse{200, chat_reply("no tags at all")};
    return FakeResponse{200, chat_reply("<Question>: Q?\n<Correct Answer>: inspector\n"
                                        "<Rephrased Sentence>: The inspector reports.")};
  });
  const ChatCompletionClient client(fast_options(server.url()), std::nullopt);
  const LlmGenerator gen(client, PromptTemplates::defaults());
  const SentenceRecord a = anchor_record();
  const std::vector<EntityRef> conf{{"T9", "external supervisor"}};
  EXPECT_THROW(generate_token_qca(a, a.entities[0], conf, gen), ParseError);
  EXPECT_THROW(generate_token_qca(a, a.entities[0], conf, gen), ValidationError);
}

TEST(Llm, ServerFailureIsRemoteError) {
  FakeServer server([](const std::string&, int) { return FakeResponse{503, "{}"}; });
  const ChatCompletionClient client(fast_options(server.url()), std::nullopt);
  EXPECT_THROW(client.complete("hi"), RemoteError);
  EXPECT_EQ(server.requests(), 2);
}

}  // namespace
}  // namespace termforge
