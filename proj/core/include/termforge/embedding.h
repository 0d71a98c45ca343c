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

#ifndef TERMFORGE_EMBEDDING_H_
#define TERMFORGE_EMBEDDING_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "termforge/http.h"
#include "termforge/model.h"
#include "termforge/tokenizer.h"

namespace termforge {

// Dense embedding; every component is finite.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::vector<double> values);
  static Vector from_eigen(const Eigen::VectorXd& v);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> values_;
};

// dot(u, v) / (|u| |v|), clamped to [-1, 1]. Throws on a dimension mismatch
// or a zero-norm input.
double cosine(const Vector& u, const Vector& v);

enum class ProviderKind { kHashing, kModel, kRemote };

std::string_view provider_kind_name(ProviderKind kind);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual ProviderKind kind() const = 0;
  // Non-empty text -> Vector of dim().
  virtual Vector embed(std::string_view text) const = 0;
};

inline constexpr std::size_t kDefaultHashingDim = 256;

// Signed feature hashing of code point n-grams (n = 2..4) over the text
// framed by start/end markers, L2-normalized.
Vector embed_hashing(std::string_view text, std::size_t dim, std::uint64_t seed);

// Bucket and sign of one n-gram; exposed so tests can check collisions.
struct HashedFeature {
  std::size_t bucket;
  double sign;
};
std::vector<HashedFeature> hashing_features(std::string_view text,
                                            std::size_t dim,
                                            std::uint64_t seed);

class HashingProvider final : public EmbeddingProvider {
 public:
  explicit HashingProvider(std::size_t dim = kDefaultHashingDim,
                           std::uint64_t seed = 0);
  std::size_t dim() const override { return dim_; }
  ProviderKind kind() const override { return ProviderKind::kHashing; }
  Vector embed(std::string_view text) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Last-position hidden state under bidirectional attention.
Vector embed_with_model(const TinyLM& model, std::span<const TokenId> tokens);

class ModelProvider final : public EmbeddingProvider {
 public:
  // Holds references; both must outlive the provider.
  ModelProvider(const TinyLM& model, const Tokenizer& tokenizer);
  std::size_t dim() const override;
  ProviderKind kind() const override { return ProviderKind::kModel; }
  Vector embed(std::string_view text) const override;

 private:
  const TinyLM& model_;
  const Tokenizer& tokenizer_;
};

struct RemoteEmbeddingOptions {
  std::string endpoint;
  std::string model = "text-embedding";
  std::size_t dim = 0;  // 0: fixed by the first response
  RetryPolicy retry;
  int max_in_flight = 4;
};

// POST {"input", "model"} -> {"data": [{"embedding": [...]}]}.
class RemoteProvider final : public EmbeddingProvider {
 public:
  explicit RemoteProvider(RemoteEmbeddingOptions options,
                          std::optional<std::string> api_key = api_key_from_env());
  std::size_t dim() const override;
  ProviderKind kind() const override { return ProviderKind::kRemote; }
  Vector embed(std::string_view text) const override;

  JsonHttpClient& http() { return client_; }

 private:
  RemoteEmbeddingOptions options_;
  JsonHttpClient client_;
  mutable std::mutex mu_;
  mutable std::size_t dim_;
};

Vector embed_remote(const RemoteProvider& provider, std::string_view text);

// Memoizes another provider by exact text.
class CachingProvider final : public EmbeddingProvider {
 public:
  explicit CachingProvider(const EmbeddingProvider& inner) : inner_(inner) {}
  std::size_t dim() const override { return inner_.dim(); }
  ProviderKind kind() const override { return inner_.kind(); }
  Vector embed(std::string_view text) const override;
  std::size_t cached() const;

 private:
  const EmbeddingProvider& inner_;
  mutable std::mutex mu_;
  mutable std::map<std::string, Vector, std::less<>> memo_;
};

}  // namespace termforge

#endif  // TERMFORGE_EMBEDDING_H_
