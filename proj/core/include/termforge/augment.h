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

#ifndef TERMFORGE_AUGMENT_H_
#define TERMFORGE_AUGMENT_H_

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "termforge/corpus.h"
#include "termforge/embedding.h"
#include "termforge/generation.h"
#include "termforge/graph.h"
#include "termforge/prompts.h"

namespace termforge {

// Multiple-choice sample built around one anchor sentence and one
// confusable neighbour. negatives[0] comes from the neighbour; the other two
// are hard negatives that perturb the anchor.
struct SentenceQCA {
  std::string question;
  std::string answer;
  std::array<std::string, 3> negatives;
  std::string anchor_id;
  std::string negative_source_id;
  Split split = Split::kUnassigned;

  void validate() const;
  friend bool operator==(const SentenceQCA&, const SentenceQCA&) = default;
};

// Term-choice sample. `declarative` states the answer and contains it
// verbatim; the negatives are confusable terms.
struct TokenQCA {
  std::string question;
  std::string answer;
  std::vector<std::string> negatives;
  std::string declarative;
  std::string anchor_id;
  Split split = Split::kUnassigned;

  void validate() const;
  friend bool operator==(const TokenQCA&, const TokenQCA&) = default;
};

// Source of questions and hard negatives.
class QcaGenerator {
 public:
  virtual ~QcaGenerator() = default;

  virtual TokenQCA token(const SentenceRecord& anchor,
                         const EntityMention& term,
                         std::span<const EntityRef> confusable) const = 0;

  // `candidates` are the anchor's candidate sets, used for entity swaps.
  virtual SentenceQCA sentence(const SentenceRecord& anchor,
                               const SentenceRecord& negative,
                               const CandidateSets& candidates) const = 0;
};

// Deterministic templates; needs no network.
class OfflineGenerator final : public QcaGenerator {
 public:
  TokenQCA token(const SentenceRecord& anchor, const EntityMention& term,
                 std::span<const EntityRef> confusable) const override;
  SentenceQCA sentence(const SentenceRecord& anchor,
                       const SentenceRecord& negative,
                       const CandidateSets& candidates) const override;
};

// Prompts a text generator and parses its tagged output.
class LlmGenerator final : public QcaGenerator {
 public:
  LlmGenerator(const TextGenerator& client, PromptTemplates templates);
  TokenQCA token(const SentenceRecord& anchor, const EntityMention& term,
                 std::span<const EntityRef> confusable) const override;
  SentenceQCA sentence(const SentenceRecord& anchor,
                       const SentenceRecord& negative,
                       const CandidateSets& candidates) const override;

  // Count of sentence outputs whose correct answer was not choice A.
  std::size_t reordered_outputs() const { return reordered_.load(); }

 private:
  const TextGenerator& client_;
  PromptTemplates templates_;
  mutable std::atomic<std::size_t> reordered_{0};
};

// Hard-negative helpers used by the offline generator.
std::string swap_entity(const SentenceRecord& anchor,
                        const SentenceRecord& negative,
                        const CandidateSets& candidates);
std::string negate_clause(std::string_view text);
std::string blank_term(const SentenceRecord& anchor, const EntityMention& term);

// Distinct confusable surfaces, excluding the answer, capped at
// max_negatives (0 = no cap).
std::vector<std::string> token_negatives(std::span<const EntityRef> confusable,
                                         std::string_view answer,
                                         std::size_t max_negatives);

TokenQCA generate_token_qca(const SentenceRecord& anchor,
                            const EntityMention& term,
                            std::span<const EntityRef> confusable,
                            const QcaGenerator& generator,
                            std::size_t max_negatives = 0);

std::vector<SentenceQCA> generate_sentence_qca(
    const SentenceRecord& anchor, std::span<const SentenceRecord> s_sen,
    const CandidateSets& candidates, const QcaGenerator& generator);

struct AugmentConfig {
  std::size_t sen_cap = 4;
  std::size_t tok_cap = 4;
  std::size_t max_negatives = 8;
  double theta_sen = 0.7;
  int workers = 1;
};

struct Rejection {
  std::string anchor_id;
  Split split = Split::kUnassigned;
  std::string kind;  // "sen" or "tok"
  std::string source;  // neighbour id or term surface
  std::string reason;
};

struct AugmentResult {
  std::vector<SentenceQCA> q_sen;
  std::vector<TokenQCA> q_tok;
  std::vector<Rejection> rejections;
};

// Walks the anchors of each split separately (train first, corpus order
// within a split). Per-sample failures are collected; throws only when no
// sample at all was produced.
AugmentResult augment_corpus(const Corpus& corpus, const SentenceGraph& graph,
                             const EmbeddingProvider& provider,
                             const QcaGenerator& generator,
                             const AugmentConfig& config);

// JSON-lines datasets; each line carries "kind": "sen" or "tok".
std::string serialize_dataset(std::span<const SentenceQCA> q_sen,
                              std::span<const TokenQCA> q_tok);
struct Dataset {
  std::vector<SentenceQCA> q_sen;
  std::vector<TokenQCA> q_tok;
};
Dataset parse_dataset(std::string_view jsonl,
                      std::string_view source = "<memory>");
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

std::string serialize_rejections(std::span<const Rejection> rejections);

}  // namespace termforge

#endif  // TERMFORGE_AUGMENT_H_
