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

#ifndef TERMFORGE_EVAL_H_
#define TERMFORGE_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "termforge/augment.h"
#include "termforge/metrics.h"
#include "termforge/model.h"
#include "termforge/random.h"
#include "termforge/tokenizer.h"

namespace termforge {

enum class ScoringMode { kEmbeddingSimilarity, kLoglikelihood };

std::string_view scoring_mode_name(ScoringMode mode);
ScoringMode parse_scoring_mode(std::string_view name);

struct QcaItem {
  std::string kind;  // "sen" or "tok"
  std::string anchor_id;
  std::string question;
  std::vector<std::string> options;
  std::size_t answer_index = 0;
};

// Answer and negatives as options, with the answer position shuffled per
// item from `seed`.
std::vector<QcaItem> make_qca_items(std::span<const SentenceQCA> q_sen,
                                    std::span<const TokenQCA> q_tok,
                                    std::uint64_t seed);

// Picks one option per item.
class OptionChooser {
 public:
  virtual ~OptionChooser() = default;
  virtual std::size_t choose(const QcaItem& item) const = 0;
};

// Index of the largest score; ties go to the lowest index.
std::size_t argmax_lowest(std::span<const double> scores);

// cosine(embed(question), embed(option)) under bidirectional attention.
class EmbeddingChooser final : public OptionChooser {
 public:
  EmbeddingChooser(const TinyLM& model, const Tokenizer& tokenizer)
      : model_(model), tokenizer_(tokenizer) {}
  std::size_t choose(const QcaItem& item) const override;
  std::vector<double> scores(const QcaItem& item) const;

 private:
  const TinyLM& model_;
  const Tokenizer& tokenizer_;
};

// Mean per-token log p(option | question), causal attention.
class LoglikelihoodChooser final : public OptionChooser {
 public:
  LoglikelihoodChooser(const TinyLM& model, const Tokenizer& tokenizer)
      : model_(model), tokenizer_(tokenizer) {}
  std::size_t choose(const QcaItem& item) const override;
  std::vector<double> scores(const QcaItem& item) const;

 private:
  const TinyLM& model_;
  const Tokenizer& tokenizer_;
};

class RandomChooser final : public OptionChooser {
 public:
  explicit RandomChooser(std::uint64_t seed) : rng_(seed) {}
  std::size_t choose(const QcaItem& item) const override;

 private:
  mutable std::mutex mu_;
  mutable Rng rng_;
};

class OracleChooser final : public OptionChooser {
 public:
  std::size_t choose(const QcaItem& item) const override {
    return item.answer_index;
  }
};

struct QcaRecord {
  std::size_t chosen = 0;
  std::size_t answer = 0;
  bool correct = false;
};

struct ClassificationScores {
  double accuracy = 0.0;
  double precision = 0.0;  // macro over option positions
  double recall = 0.0;
  double f1 = 0.0;
};

// Macro averages over every position that occurs as a gold or predicted
// label; a class with no predictions (or no gold items) scores 0 there.
ClassificationScores classification_scores(std::span<const QcaRecord> records);

struct QcaResult {
  ScoringMode mode = ScoringMode::kEmbeddingSimilarity;
  std::vector<QcaRecord> records;
  ClassificationScores scores;
};

QcaResult score_qca(std::span<const QcaItem> items, const OptionChooser& chooser,
                    ScoringMode mode, int workers = 1);
QcaResult score_qca(const TinyLM& model, const Tokenizer& tokenizer,
                    std::span<const QcaItem> items, ScoringMode mode,
                    int workers = 1);

struct QaItem {
  std::string kind;
  std::string anchor_id;
  std::string question;
  std::string reference;
};

// Question kept; the reference is the answer sentence for sentence samples
// and the declarative sentence for token samples.
std::vector<QaItem> make_qa_items(std::span<const SentenceQCA> q_sen,
                                  std::span<const TokenQCA> q_tok);

struct QaRecord {
  std::string generated;
  bool truncated = false;  // question cut to fit the context
  bool hit_limit = false;  // stopped at max_new without eos
};

struct QaResult {
  std::vector<QaRecord> records;
  TextScores scores;
};

QaResult score_qa(const TinyLM& model, const Tokenizer& tokenizer,
                  std::span<const QaItem> items, int max_new, int workers = 1);

struct TestSets {
  std::vector<QcaItem> qca_sen;
  std::vector<QcaItem> qca_tok;
  std::vector<QaItem> qa;
};

// Test-split samples only.
TestSets make_test_sets(const Dataset& dataset, std::uint64_t seed);

struct EvalOptions {
  ScoringMode mode = ScoringMode::kEmbeddingSimilarity;
  int max_new = 48;
  bool with_qa = true;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct EvalResults {
  // Empty test sets leave the matching result unset.
  std::optional<QcaResult> qca_sen;
  std::optional<QcaResult> qca_tok;
  std::optional<QaResult> qa;
  TestSets sets;
  EvalOptions options;

  // Stable key order; per-sample records included.
  nlohmann::ordered_json to_json() const;
};

EvalResults evaluate(const TinyLM& model, const Tokenizer& tokenizer,
                     const Dataset& dataset, const EvalOptions& options);

}  // namespace termforge

#endif  // TERMFORGE_EVAL_H_
