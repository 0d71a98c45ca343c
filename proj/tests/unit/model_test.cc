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

#include "termforge/model.h"

#include <cmath>

#include <gtest/gtest.h>

#include "gradcheck.h"
#include "termforge/checkpoint.h"
#include "termforge/errors.h"
#include "termforge/losses.h"

namespace termforge {
namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.d_model = 16;
  c.n_layers = 2;
  c.n_heads = 2;
  c.d_ff = 32;
  c.max_len = 24;
  return c;
}

TEST(ModelConfig, Validate) {
  ModelConfig c = small_config();
  EXPECT_NO_THROW(c.validate());
  c.n_heads = 3;  // 16 not divisible by 3
  EXPECT_THROW(c.validate(), ValidationError);
  c = small_config();
  c.vocab_size = 10;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(ModelConfig, JsonRoundTrip) {
  ModelConfig c = small_config();
  c.attention_mode = AttentionMode::kBidirectional;
  EXPECT_EQ(ModelConfig::from_json(c.to_json()), c);
}

TEST(Model, SoftmaxRowsSumToOne) {
  const TinyLM m = testing::gradcheck_model(1);
  const ConditionalForward f = forward(m, TokenSequence{1, 2, 3}, TokenSequence{4, 5, 6, 7});
  ASSERT_EQ(f.probabilities.rows(), 4);
  for (Eigen::Index r = 0; r < f.probabilities.rows(); ++r) {
    EXPECT_NEAR(f.probabilities.row(r).sum(), 1.0, 1e-12);
    EXPECT_GE(f.probabilities.row(r).minCoeff(), 0.0);
  }
}

TEST(Model, SoftmaxIsStableForLargeLogits) {
  Matrix logits(1, 3);
  logits << 1000.0, 1000.0, -1000.0;
  const Matrix p = softmax_rows(logits);
  EXPECT_NEAR(p(0, 0), 0.5, 1e-15);
  EXPECT_EQ(p(0, 2), 0.0);
}

TEST(Model, CausalPrefixIgnoresFutureTokens) {
  const TinyLM m = testing::gradcheck_model(2);
  const TokenSequence a{5, 6, 7, 8, 9};
  TokenSequence b = a;
  b[4] = 100;
  const ForwardCache ca = m.run(a, AttentionMode::kCausal, 0);
  const ForwardCache cb = m.run(b, AttentionMode::kCausal, 0);
  for (Eigen::Index r = 0; r < 4; ++r) {
    EXPECT_EQ(ca.logits.row(r), cb.logits.row(r)) << r;
  }
  EXPECT_NE(ca.logits.row(4), cb.logits.row(4));
}

TEST(Model, BidirectionalLastStateSeesEveryToken) {
  const TinyLM m = testing::gradcheck_model(3);
  const Eigen::VectorXd e1 = embed_sequence(m, TokenSequence{5, 6, 7});
  const Eigen::VectorXd e2 = embed_sequence(m, TokenSequence{50, 6, 7});
  EXPECT_GT((e1 - e2).norm(), 1e-6);
  EXPECT_EQ(e1.size(), 16);
}

TEST(Model, ZeroHeadGivesUniformDistribution) {
  TinyLM m = testing::gradcheck_model(4);
  m.parameters().output_head.setZero();
  const ConditionalForward f = forward(m, TokenSequence{1, 2}, TokenSequence{3, 4});
  const double uniform = 1.0 / m.config().vocab_size;
  EXPECT_NEAR(f.probabilities.maxCoeff(), uniform, 1e-15);
  EXPECT_NEAR(f.probabilities.minCoeff(), uniform, 1e-15);
  const std::vector<SftExample> batch{{{1, 2}, {3, 4}}};
  EXPECT_NEAR(sft_loss(m, batch), 2.0 * std::log(m.config().vocab_size), 1e-12);
}

TEST(Model, SameSeedSameParameters) {
  const TinyLM a(small_config(), 11);
  const TinyLM b(small_config(), 11);
  const TinyLM c(small_config(), 12);
  EXPECT_TRUE(a.parameters().bitwise_equal(b.parameters()));
  EXPECT_FALSE(a.parameters().bitwise_equal(c.parameters()));
  EXPECT_TRUE(a.parameters().all_finite());
}

TEST(Model, ParameterCountMatchesShapes) {
  const ModelConfig c = small_config();
  const TinyLM m(c, 1);
  const std::size_t d = 16, f = 32, v = static_cast<std::size_t>(c.vocab_size);
  const std::size_t per_layer = 4 * d * d + 4 * d + 4 * d + d * f + f + f * d + d;
  EXPECT_EQ(m.parameters().count(),
            v * d + 24 * d + 2 * per_layer + 2 * d + d * v);
}

TEST(Model, LengthLimitEnforced) {
  const TinyLM m(small_config(), 1);
  const TokenSequence long_target(30, 5);
  EXPECT_THROW(forward(m, TokenSequence{1}, long_target), ValidationError);
  EXPECT_THROW(forward(m, TokenSequence{1}, TokenSequence{}), ValidationError);
  EXPECT_THROW(embed_sequence(m, TokenSequence{}), ValidationError);
}

TEST(Model, GreedyGenerationIsDeterministicAndBounded) {
  const TinyLM m = testing::gradcheck_model(5);
  const TokenSequence cond{1, 2, 3};
  const Generation a = greedy_generate(m, cond, 6);
  const Generation b = greedy_generate(m, cond, 6);
  EXPECT_EQ(a.tokens, b.tokens);
  EXPECT_LE(a.tokens.size(), 6u);
  EXPECT_FALSE(a.truncated);
  const Generation cut = greedy_generate(m, TokenSequence(40, 7), 3);
  EXPECT_TRUE(cut.truncated);
}

TEST(Model, GradientsMatchFiniteDifferences) {
  TinyLM m = testing::gradcheck_model(6);
  const std::vector<SftExample> batch{{{1, 2, 3, 4}, {5, 6, 7}}};
  const auto r = testing::check_gradient(
      m, [&](const TinyLM& model, Parameters* g) { return sft_loss(model, batch, g); },
      60, 17);
  EXPECT_EQ(r.failures, 0u) << r.worst_coordinate << " " << r.max_relative_error;
}

TEST(Model, EmbeddingGradientMatchesFiniteDifferences) {
  TinyLM m = testing::gradcheck_model(7);
  const TokenSequence seq{4, 9, 2, 8};
  Eigen::VectorXd w(16);
  for (int i = 0; i < 16; ++i) w(i) = std::sin(1.0 + i);
  const auto r = testing::check_gradient(
      m,
      [&](const TinyLM& model, Parameters* g) {
        ForwardCache cache;
        const double value = w.dot(embed_sequence(model, seq, &cache));
        if (g != nullptr) {
          Matrix d_hidden = Matrix::Zero(static_cast<Eigen::Index>(seq.size()), 16);
          d_hidden.row(d_hidden.rows() - 1) = w.transpose();
          model.backward(cache, Matrix(), d_hidden, *g);
        }
        return value;
      },
      60, 18);
  EXPECT_EQ(r.failures, 0u) << r.worst_coordinate << " " << r.max_relative_error;
}

TEST(Checkpoint, RoundTripIsBitwise) {
  Checkpoint ck{testing::gradcheck_model(8), Tokenizer::byte_level(), {"sft", "sen"}, {}};
  ck.metadata["note"] = "x";
  const std::string bytes = serialize_checkpoint(ck);
  const Checkpoint back = parse_checkpoint(bytes);
  EXPECT_TRUE(back.model.parameters().bitwise_equal(ck.model.parameters()));
  EXPECT_EQ(back.model.config(), ck.model.config());
  EXPECT_EQ(back.tokenizer, ck.tokenizer);
  EXPECT_EQ(back.lineage, ck.lineage);
  EXPECT_EQ(back.metadata, ck.metadata);
  EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(Checkpoint, CorruptInputIsRejected) {
  const Checkpoint ck{TinyLM(small_config(), 1), Tokenizer::byte_level(), {}, {}};
  const std::string bytes = serialize_checkpoint(ck);
  EXPECT_THROW(parse_checkpoint(""), Error);
  EXPECT_THROW(parse_checkpoint("not a checkpoint"), Error);
  EXPECT_THROW(parse_checkpoint(bytes.substr(0, bytes.size() / 2)), Error);
  EXPECT_THROW(parse_checkpoint(bytes + 'x'), Error);
  std::string flipped = bytes;
  flipped[0] ^= 0x5a;
  EXPECT_THROW(parse_checkpoint(flipped), Error);
}

}  // namespace
}  // namespace termforge
