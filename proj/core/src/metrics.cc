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

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "termforge/errors.h"
#include "termforge/utf8.h"

namespace termforge {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const Words& words, std::size_t n) {
  NgramCounts counts;
  if (words.size() < n) return counts;
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    ++counts[Words(words.begin() + static_cast<std::ptrdiff_t>(i),
                   words.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::size_t clipped_matches(const NgramCounts& hyp, const NgramCounts& ref) {
  std::size_t m = 0;
  for (const auto& [gram, count] : hyp) {
    auto it = ref.find(gram);
    if (it != ref.end()) m += std::min(count, it->second);
  }
  return m;
}

double f_measure(double overlap, std::size_t hyp_len, std::size_t ref_len) {
  if (overlap == 0.0 || hyp_len == 0 || ref_len == 0) return 0.0;
  const double p = overlap / static_cast<double>(hyp_len);
  const double r = overlap / static_cast<double>(ref_len);
  return 2.0 * p * r / (p + r);
}

}  // namespace

Words metric_tokens(std::string_view text) {
  std::istringstream in(utf8::nfkc(text));
  Words out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

BleuScores corpus_bleu(std::span<const Words> hypotheses,
                       std::span<const Words> references) {
  if (hypotheses.size() != references.size()) {
    throw ValidationError("BLEU needs one reference per hypothesis");
  }
  std::size_t matched[5] = {0, 0, 0, 0, 0};
  std::size_t total[5] = {0, 0, 0, 0, 0};
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    hyp_len += hypotheses[i].size();
    ref_len += references[i].size();
    for (std::size_t n = 1; n <= 4; ++n) {
      matched[n] += clipped_matches(ngrams(hypotheses[i], n),
                                    ngrams(references[i], n));
      if (hypotheses[i].size() >= n) total[n] += hypotheses[i].size() - n + 1;
    }
  }
  BleuScores s;
  if (hyp_len == 0 || matched[1] == 0) return s;
  const double bp =
      hyp_len > ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref_len) /
                               static_cast<double>(hyp_len));
  const double p1 =
      static_cast<double>(matched[1]) / static_cast<double>(total[1]);
  s.bleu1 = bp * p1;
  double log_sum = std::log(p1);
  for (std::size_t n = 2; n <= 4; ++n) {
    log_sum += std::log(static_cast<double>(matched[n] + 1) /
                        static_cast<double>(total[n] + 1));
  }
  s.bleu4 = bp * std::exp(log_sum / 4.0);
  return s;
}

double rouge1_f(const Words& hypothesis, const Words& reference) {
  const double overlap = static_cast<double>(
      clipped_matches(ngrams(hypothesis, 1), ngrams(reference, 1)));
  return f_measure(overlap, hypothesis.size(), reference.size());
}

std::size_t lcs_length(const Words& a, const Words& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rougel_f(const Words& hypothesis, const Words& reference) {
  return f_measure(static_cast<double>(lcs_length(hypothesis, reference)),
                   hypothesis.size(), reference.size());
}

TextScores score_texts(std::span<const std::string> hypotheses,
                       std::span<const std::string> references) {
  if (hypotheses.size() != references.size()) {
    throw ValidationError("text scores need one reference per hypothesis");
  }
  if (hypotheses.empty()) throw ValidationError("no texts to score");
  std::vector<Words> hyp, ref;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    hyp.push_back(metric_tokens(hypotheses[i]));
    ref.push_back(metric_tokens(references[i]));
  }
  TextScores s;
  const BleuScores b = corpus_bleu(hyp, ref);
  s.bleu1 = b.bleu1;
  s.bleu4 = b.bleu4;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    s.rouge1 += rouge1_f(hyp[i], ref[i]);
    s.rougel += rougel_f(hyp[i], ref[i]);
  }
  s.rouge1 /= static_cast<double>(hyp.size());
  s.rougel /= static_cast<double>(hyp.size());
  return s;
}

}  // namespace termforge
