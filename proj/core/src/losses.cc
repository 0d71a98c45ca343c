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

#include "termforge/losses.h"

#include <algorithm>
#include <cmath>

#include "termforge/errors.h"

namespace termforge {
namespace {

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

// -log p_y with p floored at epsilon; writes the logit gradient into d_row.
double likelihood_term(const Eigen::Ref<const Eigen::RowVectorXd>& probs,
                       TokenId y, Eigen::Ref<Eigen::RowVectorXd> d_row) {
  const double p = probs(y);
  if (p <= kProbabilityEpsilon) {
    d_row.setZero();
    return -std::log(kProbabilityEpsilon);
  }
  d_row = probs;
  d_row(y) -= 1.0;
  return -std::log(p);
}

double clamped_likelihood_term(const Eigen::Ref<const Eigen::RowVectorXd>& probs,
                               TokenId y, Eigen::Ref<Eigen::RowVectorXd> d_row) {
  const double p = probs(y);
  if (p >= 1.0 - kProbabilityEpsilon) {
    d_row.setZero();
    return -std::log(1.0 - kProbabilityEpsilon);
  }
  return likelihood_term(probs, y, d_row);
}

// -log(1 - p_y) with p clamped to [eps, 1 - eps].
double suppression_term(const Eigen::Ref<const Eigen::RowVectorXd>& probs,
                        TokenId y, Eigen::Ref<Eigen::RowVectorXd> d_row) {
  const double p = probs(y);
  if (p >= 1.0 - kProbabilityEpsilon) {
    d_row.setZero();
    return -std::log(kProbabilityEpsilon);
  }
  if (p <= kProbabilityEpsilon) {
    d_row.setZero();
    return -std::log(1.0 - kProbabilityEpsilon);
  }
  // d/dz_k of -log(1 - p_y) = p_y (delta_ky - p_k) / (1 - p_y)
  const double factor = p / (1.0 - p);
  d_row = -factor * probs;
  d_row(y) += factor;
  return -std::log(1.0 - p);
}

struct Embedded {
  ForwardCache cache;
  Eigen::VectorXd unit;
  double norm = 0.0;
};

Embedded embed_normalized(const TinyLM& model, std::span<const TokenId> tokens) {
  Embedded e;
  const Eigen::VectorXd raw = embed_sequence(model, tokens, &e.cache);
  e.norm = raw.norm();
  if (!(e.norm > 0.0)) throw ValidationError("zero-norm embedding");
  e.unit = raw / e.norm;
  return e;
}

void backprop_normalized(const TinyLM& model, const Embedded& e,
                         const Eigen::VectorXd& d_unit, Parameters& grads) {
  const Eigen::VectorXd d_raw =
      (d_unit - e.unit * e.unit.dot(d_unit)) / e.norm;
  Matrix d_hidden = Matrix::Zero(e.cache.hidden.rows(), e.cache.hidden.cols());
  d_hidden.row(d_hidden.rows() - 1) = d_raw.transpose();
  model.backward(e.cache, Matrix(), d_hidden, grads);
}

}  // namespace

TokenSequence MixedSequence::reconstruct() const {
  TokenSequence out(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(pos_span.first));
  out.insert(out.end(), z_plus.begin(), z_plus.end());
  out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos_span.second),
             tokens.end());
  return out;
}

std::optional<std::size_t> find_subsequence(std::span<const TokenId> haystack,
                                            std::span<const TokenId> needle) {
  if (needle.empty() || needle.size() > haystack.size()) return std::nullopt;
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(),
                        needle.end());
  if (it == haystack.end()) return std::nullopt;
  return static_cast<std::size_t>(it - haystack.begin());
}

MixedSequence mix(std::span<const TokenId> t, std::span<const TokenId> z_plus,
                  std::span<const TokenId> z_minus) {
  if (z_plus.empty()) throw ValidationError("mix: positive span is empty");
  if (z_minus.empty()) throw ValidationError("mix: negative span is empty");
  const std::optional<std::size_t> at = find_subsequence(t, z_plus);
  if (!at) {
    throw ValidationError("mix: positive span does not occur in the sequence");
  }
  MixedSequence m;
  m.t.assign(t.begin(), t.end());
  m.z_plus.assign(z_plus.begin(), z_plus.end());
  m.z_minus.assign(z_minus.begin(), z_minus.end());
  m.tokens.assign(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(*at));
  m.tokens.insert(m.tokens.end(), z_minus.begin(), z_minus.end());
  m.tokens.insert(m.tokens.end(),
                  t.begin() + static_cast<std::ptrdiff_t>(*at + z_plus.size()),
                  t.end());
  m.pos_span = {*at, *at + z_minus.size()};
  m.mask.assign(m.tokens.size(), 1);
  std::fill(m.mask.begin() + static_cast<std::ptrdiff_t>(m.pos_span.first),
            m.mask.begin() + static_cast<std::ptrdiff_t>(m.pos_span.second), 0);
  return m;
}

Temperature::Temperature(double tau) : tau_(tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ValidationError("temperature must be positive");
  }
}

double sft_loss(const TinyLM& model, std::span<const SftExample> batch,
                Parameters* grads) {
  if (batch.empty()) throw ValidationError("sft_loss: empty batch");
  double total = 0.0;
  for (const SftExample& ex : batch) {
    const ConditionalForward f = forward(model, ex.condition, ex.target);
    Matrix d_logits(f.probabilities.rows(), f.probabilities.cols());
    for (Eigen::Index j = 0; j < f.probabilities.rows(); ++j) {
      total += likelihood_term(f.probabilities.row(j),
                               ex.target[static_cast<std::size_t>(j)],
                               d_logits.row(j));
    }
    if (grads != nullptr) model.backward(f.cache, d_logits, Matrix(), *grads);
  }
  return total;
}

InfoNceResult sen_infonce(const Eigen::VectorXd& query,
                          const Eigen::VectorXd& positive,
                          std::span<const Eigen::VectorXd> negatives,
                          Temperature tau) {
  if (negatives.empty()) throw ValidationError("sen_infonce: no negatives");
  const Eigen::Index dim = query.size();
  if (positive.size() != dim) throw ValidationError("sen_infonce: dim mismatch");
  for (const auto& n : negatives) {
    if (n.size() != dim) throw ValidationError("sen_infonce: dim mismatch");
  }
  const double t = tau.value();
  const auto options = static_cast<Eigen::Index>(negatives.size() + 1);
  Eigen::VectorXd logits(options);
  logits(0) = query.dot(positive) / t;
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    logits(static_cast<Eigen::Index>(i + 1)) = query.dot(negatives[i]) / t;
  }
  InfoNceResult r;
  const double lse = log_sum_exp(logits);
  r.loss = lse - logits(0);
  Eigen::VectorXd d_logits = (logits.array() - lse).exp().matrix();
  d_logits(0) -= 1.0;
  r.d_query = d_logits(0) * positive / t;
  r.d_positive = d_logits(0) * query / t;
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    const double g = d_logits(static_cast<Eigen::Index>(i + 1));
    r.d_query += g * negatives[i] / t;
    r.d_negatives.push_back(g * query / t);
  }
  return r;
}

double sen_loss(const TinyLM& model, const ContrastiveExample& example,
                Temperature tau, Parameters* grads) {
  const Embedded q = embed_normalized(model, example.question);
  const Embedded a = embed_normalized(model, example.answer);
  std::vector<Embedded> negs;
  std::vector<Eigen::VectorXd> neg_units;
  negs.reserve(example.negatives.size());
  for (const TokenSequence& n : example.negatives) {
    negs.push_back(embed_normalized(model, n));
    neg_units.push_back(negs.back().unit);
  }
  const InfoNceResult r = sen_infonce(q.unit, a.unit, neg_units, tau);
  if (grads != nullptr) {
    backprop_normalized(model, q, r.d_query, *grads);
    backprop_normalized(model, a, r.d_positive, *grads);
    for (std::size_t i = 0; i < negs.size(); ++i) {
      backprop_normalized(model, negs[i], r.d_negatives[i], *grads);
    }
  }
  return r.loss;
}

double embedding_margin(const TinyLM& model,
                        std::span<const ContrastiveExample> examples) {
  if (examples.empty()) throw ValidationError("embedding_margin: no examples");
  double total = 0.0;
  for (const ContrastiveExample& ex : examples) {
    const Eigen::VectorXd q = embed_normalized(model, ex.question).unit;
    const double pos = q.dot(embed_normalized(model, ex.answer).unit);
    double neg = 0.0;
    for (const TokenSequence& n : ex.negatives) {
      neg += q.dot(embed_normalized(model, n).unit);
    }
    total += pos - neg / static_cast<double>(ex.negatives.size());
  }
  return total / static_cast<double>(examples.size());
}

double mix_loss(const TinyLM& model, const MixedSequence& mixed,
                std::span<const TokenId> condition, Parameters* grads) {
  if (mixed.mask.size() != mixed.tokens.size()) {
    throw ValidationError("mix_loss: mask length differs from sequence length");
  }
  const ConditionalForward f = forward(model, condition, mixed.tokens);
  Matrix d_logits(f.probabilities.rows(), f.probabilities.cols());
  double total = 0.0;
  for (Eigen::Index j = 0; j < f.probabilities.rows(); ++j) {
    const auto uj = static_cast<std::size_t>(j);
    if (mixed.mask[uj] != 0) {
      total += clamped_likelihood_term(f.probabilities.row(j), mixed.tokens[uj],
                                       d_logits.row(j));
    } else {
      total += suppression_term(f.probabilities.row(j), mixed.tokens[uj],
                                d_logits.row(j));
    }
  }
  if (grads != nullptr) model.backward(f.cache, d_logits, Matrix(), *grads);
  return total;
}

double mix_loss(const TinyLM& model, std::span<const TokenId> t,
                std::span<const TokenId> z_plus,
                std::span<const TokenId> z_minus,
                std::span<const TokenId> condition, Parameters* grads) {
  return mix_loss(model, mix(t, z_plus, z_minus), condition, grads);
}

double tok_loss(const TinyLM& model, const TokenContrastiveExample& example,
                Parameters* grads) {
  if (example.negatives.empty()) throw ValidationError("tok_loss: no negatives");
  if (!find_subsequence(example.declarative, example.answer)) {
    throw ValidationError(
        "tok_loss: answer tokens are not a contiguous subsequence of the "
        "declarative sentence");
  }
  double total = 0.0;
  for (const TokenSequence& negative : example.negatives) {
    total += mix_loss(model, example.declarative, example.answer, negative,
                      example.question, grads);
  }
  return total;
}

}  // namespace termforge
