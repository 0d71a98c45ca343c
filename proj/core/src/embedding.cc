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

#include "termforge/embedding.h"

#include <algorithm>
#include <cmath>

#include "termforge/errors.h"
#include "termforge/utf8.h"

namespace termforge {
namespace {

constexpr char32_t kTextStart = 0x0002;
constexpr char32_t kTextEnd = 0x0003;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x9e3779b97f4a7c15ULL);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  // Final avalanche so low bits depend on every byte.
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

}  // namespace

Vector::Vector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("vector has a non-finite value");
  }
}

Vector Vector::from_eigen(const Eigen::VectorXd& v) {
  return Vector(std::vector<double>(v.data(), v.data() + v.size()));
}

double Vector::norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

double cosine(const Vector& u, const Vector& v) {
  if (u.dim() != v.dim()) {
    throw ValidationError("cosine: dimension mismatch (" +
                          std::to_string(u.dim()) + " vs " +
                          std::to_string(v.dim()) + ")");
  }
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw ValidationError("cosine: zero-norm input");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

std::string_view provider_kind_name(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::kHashing:
      return "hashing";
    case ProviderKind::kModel:
      return "model";
    case ProviderKind::kRemote:
      return "remote";
  }
  return "unknown";
}

std::vector<HashedFeature> hashing_features(std::string_view text,
                                            std::size_t dim,
                                            std::uint64_t seed) {
  if (dim == 0) throw ValidationError("hashing dimension must be positive");
  std::u32string framed;
  framed.push_back(kTextStart);
  framed += utf8::decode(text);
  framed.push_back(kTextEnd);
  std::vector<HashedFeature> out;
  for (std::size_t n = 2; n <= 4; ++n) {
    if (framed.size() < n) break;
    for (std::size_t i = 0; i + n <= framed.size(); ++i) {
      const std::string gram =
          utf8::encode(std::u32string_view(framed).substr(i, n));
      const std::uint64_t h = fnv1a(gram, seed);
      out.push_back({static_cast<std::size_t>(h % dim),
                     (h >> 63) != 0 ? -1.0 : 1.0});
    }
  }
  return out;
}

Vector embed_hashing(std::string_view text, std::size_t dim,
                     std::uint64_t seed) {
  if (text.empty()) throw ValidationError("cannot embed empty text");
  std::vector<double> values(dim, 0.0);
  for (const HashedFeature& f : hashing_features(text, dim, seed)) {
    values[f.bucket] += f.sign;
  }
  double norm = 0.0;
  for (double v : values) norm += v * v;
  if (norm == 0.0) {
    // Every bucket cancelled; fall back to a single whole-text feature.
    values[static_cast<std::size_t>(fnv1a(text, seed) % dim)] = 1.0;
    norm = 1.0;
  }
  norm = std::sqrt(norm);
  for (double& v : values) v /= norm;
  return Vector(std::move(values));
}

HashingProvider::HashingProvider(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim_ == 0) throw ValidationError("hashing dimension must be positive");
}

Vector HashingProvider::embed(std::string_view text) const {
  return embed_hashing(text, dim_, seed_);
}

Vector embed_with_model(const TinyLM& model, std::span<const TokenId> tokens) {
  if (tokens.empty()) throw ValidationError("cannot embed an empty sequence");
  if (tokens.size() > static_cast<std::size_t>(model.config().max_len)) {
    throw ValidationError("sequence of " + std::to_string(tokens.size()) +
                          " tokens exceeds max_len");
  }
  return Vector::from_eigen(embed_sequence(model, tokens));
}

ModelProvider::ModelProvider(const TinyLM& model, const Tokenizer& tokenizer)
    : model_(model), tokenizer_(tokenizer) {}

std::size_t ModelProvider::dim() const {
  return static_cast<std::size_t>(model_.config().d_model);
}

Vector ModelProvider::embed(std::string_view text) const {
  if (text.empty()) throw ValidationError("cannot embed empty text");
  return embed_with_model(model_, tokenizer_.encode(text));
}

RemoteProvider::RemoteProvider(RemoteEmbeddingOptions options,
                               std::optional<std::string> api_key)
    : options_(std::move(options)),
      client_(options_.endpoint, options_.retry, std::move(api_key),
              options_.max_in_flight),
      dim_(options_.dim) {}

std::size_t RemoteProvider::dim() const {
  std::lock_guard<std::mutex> lock(mu_);
  return dim_;
}

Vector RemoteProvider::embed(std::string_view text) const {
  if (text.empty()) throw ValidationError("cannot embed empty text");
  nlohmann::json body;
  body["input"] = std::string(text);
  body["model"] = options_.model;
  const nlohmann::json response = client_.post(body);
  const auto* data = response.contains("data") ? &response["data"] : nullptr;
  if (data == nullptr || !data->is_array() || data->empty() ||
      !(*data)[0].contains("embedding") || !(*data)[0]["embedding"].is_array()) {
    throw RemoteError("embedding response does not match {data:[{embedding}]}");
  }
  std::vector<double> values;
  for (const auto& x : (*data)[0]["embedding"]) {
    if (!x.is_number()) throw RemoteError("embedding contains a non-number");
    values.push_back(x.get<double>());
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (dim_ == 0) dim_ = values.size();
    if (values.size() != dim_ || values.empty()) {
      throw RemoteError("embedding has dimension " +
                        std::to_string(values.size()) + ", expected " +
                        std::to_string(dim_));
    }
  }
  try {
    return Vector(std::move(values));
  } catch (const ValidationError& e) {
    throw RemoteError(e.what());
  }
}

Vector embed_remote(const RemoteProvider& provider, std::string_view text) {
  return provider.embed(text);
}

Vector CachingProvider::embed(std::string_view text) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = memo_.find(text); it != memo_.end()) return it->second;
  }
  Vector v = inner_.embed(text);
  std::lock_guard<std::mutex> lock(mu_);
  return memo_.emplace(std::string(text), std::move(v)).first->second;
}

std::size_t CachingProvider::cached() const {
  std::lock_guard<std::mutex> lock(mu_);
  return memo_.size();
}

}  // namespace termforge
