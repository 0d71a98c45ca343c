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

#include "termforge/metrics.h"

#include <cmath>
#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace termforge {
namespace {

nlohmann::json golden() {
  std::ifstream in(TERMFORGE_TEST_DATA_DIR "/golden/metrics_golden.json");
  return nlohmann::json::parse(in);
}

TEST(Metrics, PerPairGoldenValues) {
  for (const auto& p : golden()["pairs"]) {
    const Words h = metric_tokens(p["hypothesis"].get<std::string>());
    const Words r = metric_tokens(p["reference"].get<std::string>());
    const std::vector<Words> hs{h}, rs{r};
    const BleuScores b = corpus_bleu(hs, rs);
    const std::string label = p["hypothesis"].get<std::string>();
    EXPECT_NEAR(b.bleu1, p["bleu1"].get<double>(), 1e-9) << label;
    EXPECT_NEAR(b.bleu4, p["bleu4"].get<double>(), 1e-9) << label;
    EXPECT_NEAR(rouge1_f(h, r), p["rouge1"].get<double>(), 1e-9) << label;
    EXPECT_NEAR(rougel_f(h, r), p["rougel"].get<double>(), 1e-9) << label;
    EXPECT_EQ(lcs_length(h, r), p["lcs"].get<std::size_t>()) << label;
  }
}

TEST(Metrics, CorpusGoldenValues) {
  const nlohmann::json g = golden();
  std::vector<std::string> hyps, refs;
  for (const auto& p : g["pairs"]) {
    hyps.push_back(p["hypothesis"]);
    refs.push_back(p["reference"]);
  }
  const TextScores s = score_texts(hyps, refs);
  EXPECT_NEAR(s.bleu1, g["corpus"]["bleu1"].get<double>(), 1e-9);
  EXPECT_NEAR(s.bleu4, g["corpus"]["bleu4"].get<double>(), 1e-9);
  EXPECT_NEAR(s.rouge1, g["corpus"]["rouge1"].get<double>(), 1e-9);
  EXPECT_NEAR(s.rougel, g["corpus"]["rougel"].get<double>(), 1e-9);
}

TEST(Metrics, BrevityPenaltyCase) {
  const std::vector<Words> h{{"the", "cat"}}, r{{"the", "cat", "sat"}};
  EXPECT_NEAR(corpus_bleu(h, r).bleu1, std::exp(1.0 - 1.5), 1e-15);
}

TEST(Metrics, TokensAreNfkcWhitespaceWords) {
  EXPECT_EQ(metric_tokens("  ｔｈｅ\tcat \n"), (Words{"the", "cat"}));
  EXPECT_TRUE(metric_tokens("   ").empty());
}

TEST(Metrics, EmptyInputs) {
  const std::vector<Words> none;
  const BleuScores b = corpus_bleu(none, none);
  EXPECT_EQ(b.bleu1, 0.0);
  EXPECT_EQ(rouge1_f({}, {"a"}), 0.0);
  EXPECT_EQ(rougel_f({}, {}), 0.0);
  EXPECT_EQ(lcs_length({}, {"a"}), 0u);
}

TEST(Metrics, BoundsOnRandomPairs) {
  const Words pool{"a", "b", "c", "d", "e"};
  std::uint64_t state = 7;
  auto next = [&] { return (state = state * 6364136223846793005ULL + 1442695040888963407ULL) >> 33; };
  for (int i = 0; i < 200; ++i) {
    Words h, r;
    for (std::size_t k = 1 + next() % 6; k > 0; --k) h.push_back(pool[next() % 5]);
    for (std::size_t k = 1 + next() % 6; k > 0; --k) r.push_back(pool[next() % 5]);
    const double r1 = rouge1_f(h, r), rl = rougel_f(h, r);
    EXPECT_GE(rl, 0.0);
    EXPECT_LE(rl, r1 + 1e-15);  // LCS never exceeds clipped unigram overlap
    EXPECT_LE(r1, 1.0);
    EXPECT_EQ(lcs_length(h, r), lcs_length(r, h));
    const std::vector<Words> hs{h}, rs{r};
    const BleuScores b = corpus_bleu(hs, rs);
    EXPECT_GE(b.bleu4, 0.0);
    EXPECT_LE(b.bleu1, 1.0);
  }
}

}  // namespace
}  // namespace termforge
