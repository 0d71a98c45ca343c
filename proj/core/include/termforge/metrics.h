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

#ifndef TERMFORGE_METRICS_H_
#define TERMFORGE_METRICS_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace termforge {

using Words = std::vector<std::string>;

// NFKC normalization, then split on whitespace.
Words metric_tokens(std::string_view text);

struct BleuScores {
  double bleu1 = 0.0;
  double bleu4 = 0.0;
};

// Corpus-level BLEU: clipped n-gram counts pooled over all pairs, one
// brevity penalty from the pooled lengths. BLEU-4 adds one to the matched
// and total counts of 2-, 3- and 4-grams.
BleuScores corpus_bleu(std::span<const Words> hypotheses,
                       std::span<const Words> references);

// F-measures for one pair.
double rouge1_f(const Words& hypothesis, const Words& reference);
double rougel_f(const Words& hypothesis, const Words& reference);
std::size_t lcs_length(const Words& a, const Words& b);

struct TextScores {
  double bleu1 = 0.0;
  double bleu4 = 0.0;
  double rouge1 = 0.0;  // mean over pairs
  double rougel = 0.0;  // mean over pairs
};

TextScores score_texts(std::span<const std::string> hypotheses,
                       std::span<const std::string> references);

}  // namespace termforge

#endif  // TERMFORGE_METRICS_H_
