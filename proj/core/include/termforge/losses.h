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

#ifndef TERMFORGE_LOSSES_H_
#define TERMFORGE_LOSSES_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "termforge/model.h"
#include "termforge/tokenizer.h"

namespace termforge {

// Probability clamp applied before every log in the mixed-sequence loss.
inline constexpr double kProbabilityEpsilon = 1e-12;

// t with the first occurrence of z_plus replaced by z_minus. mask[j] is 1 for
// tokens kept from t and 0 for tokens that came from z_minus.
struct MixedSequence {
  TokenSequence tokens;
  std::vector<std::uint8_t> mask;
  std::pair<std::size_t, std::size_t> pos_span;  // z_minus region in tokens
  TokenSequence t, z_plus, z_minus;

  // Puts z_plus back over pos_span.
  TokenSequence reconstruct() const;
};

// Throws ValidationError when z_plus is empty or does not occur in t.
MixedSequence mix(std::span<const TokenId> t, std::span<const TokenId> z_plus,
                  std::span<const TokenId> z_minus);

// Index of the first occurrence of needle in haystack, if any.
std::optional<std::size_t> find_subsequence(std::span<const TokenId> haystack,
                                            std::span<const TokenId> needle);

class Temperature {
 public:
  explicit Temperature(double tau);
  double value() const { return tau_; }

 private:
  double tau_;
};

struct SftExample {
  TokenSequence condition;
  TokenSequence target;
};

// Sum over the batch of -log p(target | condition). Gradients are added into
// `grads` when it is non-null.
double sft_loss(const TinyLM& model, std::span<const SftExample> batch,
                Parameters* grads = nullptr);

struct InfoNceResult {
  double loss = 0.0;
  Eigen::VectorXd d_query;
  Eigen::VectorXd d_positive;
  std::vector<Eigen::VectorXd> d_negatives;
};

// -log softmax over {positive} + negatives of the dot products with the
// query, divided by tau. Inputs are used as given (callers normalize).
InfoNceResult sen_infonce(const Eigen::VectorXd& query,
                          const Eigen::VectorXd& positive,
                          std::span<const Eigen::VectorXd> negatives,
                          Temperature tau);

struct ContrastiveExample {
  TokenSequence question;
  TokenSequence answer;
  std::vector<TokenSequence> negatives;
};

// Sentence-level objective through the model: every text is embedded with
// bidirectional attention, L2-normalized, then scored by sen_infonce.
double sen_loss(const TinyLM& model, const ContrastiveExample& example,
                Temperature tau, Parameters* grads = nullptr);

// Mean over examples of q.a - mean_j q.c_j on normalized embeddings.
double embedding_margin(const TinyLM& model,
                        std::span<const ContrastiveExample> examples);

// Mixed-sequence likelihood/suppression loss conditioned on `condition`.
double mix_loss(const TinyLM& model, const MixedSequence& mixed,
                std::span<const TokenId> condition,
                Parameters* grads = nullptr);
double mix_loss(const TinyLM& model, std::span<const TokenId> t,
                std::span<const TokenId> z_plus,
                std::span<const TokenId> z_minus,
                std::span<const TokenId> condition,
                Parameters* grads = nullptr);

struct TokenContrastiveExample {
  TokenSequence question;
  TokenSequence declarative;
  TokenSequence answer;
  std::vector<TokenSequence> negatives;
};

// Sum of mix_loss over the negatives, accumulated in listed order.
double tok_loss(const TinyLM& model, const TokenContrastiveExample& example,
                Parameters* grads = nullptr);

}  // namespace termforge

#endif  // TERMFORGE_LOSSES_H_
