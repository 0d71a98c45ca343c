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

#ifndef TERMFORGE_MODEL_H_
#define TERMFORGE_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "termforge/tokenizer.h"

namespace termforge {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class AttentionMode { kCausal, kBidirectional };

struct ModelConfig {
  int vocab_size = Tokenizer::kByteVocabSize;
  int d_model = 64;
  int n_layers = 2;
  int n_heads = 4;
  int d_ff = 256;
  int max_len = 256;
  AttentionMode attention_mode = AttentionMode::kCausal;

  void validate() const;
  int head_dim() const { return d_model / n_heads; }

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct LayerParameters {
  Matrix ln1_gain, ln1_bias;  // 1 x d
  Matrix wq, wk, wv, wo;      // d x d
  Matrix bq, bk, bv, bo;      // 1 x d
  Matrix ln2_gain, ln2_bias;  // 1 x d
  Matrix w1;                  // d x d_ff
  Matrix b1;                  // 1 x d_ff
  Matrix w2;                  // d_ff x d
  Matrix b2;                  // 1 x d
};

// Parameter set; also used as the gradient accumulator, so both share one
// canonical tensor order.
struct Parameters {
  Matrix token_embedding;     // vocab x d
  Matrix position_embedding;  // max_len x d
  std::vector<LayerParameters> layers;
  Matrix final_gain, final_bias;  // 1 x d
  Matrix output_head;             // d x vocab

  static Parameters zeros(const ModelConfig& config);

  std::vector<std::pair<std::string, Matrix*>> named();
  std::vector<std::pair<std::string, const Matrix*>> named() const;

  void set_zero();
  void add_scaled(const Parameters& other, double scale);
  void scale(double factor);
  double squared_norm() const;
  bool all_finite() const;
  std::size_t count() const;

  bool bitwise_equal(const Parameters& other) const;
};

struct LayerCache {
  Matrix input;
  Matrix ln1_xhat, ln1_out;
  Eigen::VectorXd ln1_rstd;
  Matrix q, k, v;
  std::vector<Matrix> probs;  // per head, T x T
  Matrix attn_out;
  Matrix ln2_xhat, ln2_out;
  Eigen::VectorXd ln2_rstd;
  Matrix ff_pre, ff_act;
};

// Activations retained for the backward pass.
struct ForwardCache {
  TokenSequence tokens;
  AttentionMode mode = AttentionMode::kCausal;
  std::size_t logit_begin = 0;
  std::vector<LayerCache> layers;
  Matrix final_xhat;
  Eigen::VectorXd final_rstd;
  Matrix hidden;  // T x d, after the final layer norm
  Matrix logits;  // (T - logit_begin) x vocab

  std::size_t length() const { return tokens.size(); }
};

// Small pre-norm decoder with learned absolute positions. One weight set
// serves both attention modes; only the mask differs.
class TinyLM {
 public:
  TinyLM() = default;
  TinyLM(ModelConfig config, std::uint64_t seed);
  TinyLM(ModelConfig config, Parameters parameters, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const Parameters& parameters() const { return params_; }
  Parameters& parameters() { return params_; }
  std::uint64_t seed() const { return seed_; }

  // Logits are computed only for rows [logit_begin, T); pass T to skip them.
  ForwardCache run(std::span<const TokenId> tokens, AttentionMode mode,
                   std::size_t logit_begin) const;

  // Accumulates into `grads`. Either upstream gradient may be empty.
  // d_logits has shape (T - logit_begin) x vocab, d_hidden T x d.
  // When `d_input` is given it receives the gradient with respect to the
  // summed token + position embeddings (T x d).
  void backward(const ForwardCache& cache, const Matrix& d_logits,
                const Matrix& d_hidden, Parameters& grads,
                Matrix* d_input = nullptr) const;

 private:
  ModelConfig config_;
  Parameters params_;
  std::uint64_t seed_ = 0;
};

// Next-token distributions for a target conditioned on a prefix. The model
// input is condition ++ [sep] ++ target, and row j of `probabilities` is
// p(target[j] | condition, sep, target[<j]).
struct ConditionalForward {
  Matrix probabilities;  // |target| x vocab
  ForwardCache cache;
};

ConditionalForward forward(const TinyLM& model,
                           std::span<const TokenId> condition,
                           std::span<const TokenId> target);

// Final-layer hidden state of the last position, bidirectional attention.
Eigen::VectorXd embed_sequence(const TinyLM& model,
                               std::span<const TokenId> tokens,
                               ForwardCache* cache = nullptr);

struct Generation {
  TokenSequence tokens;
  bool truncated = false;  // condition was cut to fit max_len
  bool finished = false;   // stopped at eos (which is not included)
};

// Argmax decoding after condition ++ [sep]; stops at eos or max_new tokens.
Generation greedy_generate(const TinyLM& model,
                           std::span<const TokenId> condition, int max_new);

// Gradients of sum(d_logits * logits) for a cache from forward().
Parameters backward(const TinyLM& model, const ForwardCache& cache,
                    const Matrix& d_logits);

// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& logits);

}  // namespace termforge

#endif  // TERMFORGE_MODEL_H_
