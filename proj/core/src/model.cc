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

#include "termforge/model.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "termforge/errors.h"
#include "termforge/random.h"

namespace termforge {
namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kInitStd = 0.02;

void layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias,
                Matrix& xhat, Eigen::VectorXd& rstd, Matrix& out) {
  const Eigen::Index rows = x.rows();
  const double d = static_cast<double>(x.cols());
  xhat.resize(rows, x.cols());
  out.resize(rows, x.cols());
  rstd.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double mean = x.row(i).sum() / d;
    const auto centered = x.row(i).array() - mean;
    const double var = centered.square().sum() / d;
    rstd(i) = 1.0 / std::sqrt(var + kLayerNormEps);
    xhat.row(i) = centered * rstd(i);
    out.row(i) = xhat.row(i).array() * gain.row(0).array() + bias.row(0).array();
  }
}

Matrix layer_norm_backward(const Matrix& d_out, const Matrix& xhat,
                           const Eigen::VectorXd& rstd, const Matrix& gain,
                           Matrix& d_gain, Matrix& d_bias) {
  d_gain.row(0) += (d_out.array() * xhat.array()).colwise().sum().matrix();
  d_bias.row(0) += d_out.colwise().sum();
  const double d = static_cast<double>(xhat.cols());
  Matrix dx(xhat.rows(), xhat.cols());
  for (Eigen::Index i = 0; i < xhat.rows(); ++i) {
    const Eigen::RowVectorXd dxhat =
        (d_out.row(i).array() * gain.row(0).array()).matrix();
    const double mean_dxhat = dxhat.sum() / d;
    const double mean_dxhat_xhat = dxhat.dot(xhat.row(i)) / d;
    dx.row(i) = rstd(i) * (dxhat.array() - mean_dxhat -
                           xhat.row(i).array() * mean_dxhat_xhat);
  }
  return dx;
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

double gelu(double x) {
  return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
}

double gelu_grad(double x) {
  const double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
  return 0.5 * (1.0 + t) +
         0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
}

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

void softmax_in_place(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mx = m.row(i).maxCoeff();
    m.row(i) = (m.row(i).array() - mx).exp();
    m.row(i) /= m.row(i).sum();
  }
}

Matrix random_matrix(Rng& rng, int rows, int cols, double stddev) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = stddev * rng.normal();
  return m;
}

Matrix constant(int rows, int cols, double value) {
  return Matrix::Constant(rows, cols, value);
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size <= 0 || d_model <= 0 || n_layers <= 0 || n_heads <= 0 ||
      d_ff <= 0 || max_len <= 0) {
    throw ValidationError("model dimensions must be positive");
  }
  if (d_model % n_heads != 0) {
    throw ValidationError("d_model must be divisible by n_heads");
  }
  if (vocab_size < Tokenizer::kByteVocabSize) {
    throw ValidationError("vocab_size must cover the byte vocabulary");
  }
}

nlohmann::json ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["vocab_size"] = vocab_size;
  j["d_model"] = d_model;
  j["n_layers"] = n_layers;
  j["n_heads"] = n_heads;
  j["d_ff"] = d_ff;
  j["max_len"] = max_len;
  j["attention_mode"] =
      attention_mode == AttentionMode::kCausal ? "causal" : "bidirectional";
  return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.d_model = j.value("d_model", c.d_model);
  c.n_layers = j.value("n_layers", c.n_layers);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.d_ff = j.value("d_ff", c.d_ff);
  c.max_len = j.value("max_len", c.max_len);
  const std::string mode = j.value("attention_mode", std::string("causal"));
  if (mode == "causal") {
    c.attention_mode = AttentionMode::kCausal;
  } else if (mode == "bidirectional") {
    c.attention_mode = AttentionMode::kBidirectional;
  } else {
    throw ValidationError("unknown attention_mode '" + mode + "'");
  }
  c.validate();
  return c;
}

Parameters Parameters::zeros(const ModelConfig& config) {
  const int d = config.d_model;
  Parameters p;
  p.token_embedding = Matrix::Zero(config.vocab_size, d);
  p.position_embedding = Matrix::Zero(config.max_len, d);
  p.layers.resize(static_cast<std::size_t>(config.n_layers));
  for (LayerParameters& l : p.layers) {
    l.ln1_gain = Matrix::Zero(1, d);
    l.ln1_bias = Matrix::Zero(1, d);
    l.wq = Matrix::Zero(d, d);
    l.wk = Matrix::Zero(d, d);
    l.wv = Matrix::Zero(d, d);
    l.wo = Matrix::Zero(d, d);
    l.bq = Matrix::Zero(1, d);
    l.bk = Matrix::Zero(1, d);
    l.bv = Matrix::Zero(1, d);
    l.bo = Matrix::Zero(1, d);
    l.ln2_gain = Matrix::Zero(1, d);
    l.ln2_bias = Matrix::Zero(1, d);
    l.w1 = Matrix::Zero(d, config.d_ff);
    l.b1 = Matrix::Zero(1, config.d_ff);
    l.w2 = Matrix::Zero(config.d_ff, d);
    l.b2 = Matrix::Zero(1, d);
  }
  p.final_gain = Matrix::Zero(1, d);
  p.final_bias = Matrix::Zero(1, d);
  p.output_head = Matrix::Zero(d, config.vocab_size);
  return p;
}

std::vector<std::pair<std::string, Matrix*>> Parameters::named() {
  std::vector<std::pair<std::string, Matrix*>> out;
  out.emplace_back("token_embedding", &token_embedding);
  out.emplace_back("position_embedding", &position_embedding);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string prefix = "layers." + std::to_string(i) + ".";
    LayerParameters& l = layers[i];
    out.emplace_back(prefix + "ln1.gain", &l.ln1_gain);
    out.emplace_back(prefix + "ln1.bias", &l.ln1_bias);
    out.emplace_back(prefix + "attn.wq", &l.wq);
    out.emplace_back(prefix + "attn.bq", &l.bq);
    out.emplace_back(prefix + "attn.wk", &l.wk);
    out.emplace_back(prefix + "attn.bk", &l.bk);
    out.emplace_back(prefix + "attn.wv", &l.wv);
    out.emplace_back(prefix + "attn.bv", &l.bv);
    out.emplace_back(prefix + "attn.wo", &l.wo);
    out.emplace_back(prefix + "attn.bo", &l.bo);
    out.emplace_back(prefix + "ln2.gain", &l.ln2_gain);
    out.emplace_back(prefix + "ln2.bias", &l.ln2_bias);
    out.emplace_back(prefix + "ffn.w1", &l.w1);
    out.emplace_back(prefix + "ffn.b1", &l.b1);
    out.emplace_back(prefix + "ffn.w2", &l.w2);
    out.emplace_back(prefix + "ffn.b2", &l.b2);
  }
  out.emplace_back("final_ln.gain", &final_gain);
  out.emplace_back("final_ln.bias", &final_bias);
  out.emplace_back("output_head", &output_head);
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> Parameters::named() const {
  auto mutable_view = const_cast<Parameters*>(this)->named();
  std::vector<std::pair<std::string, const Matrix*>> out;
  out.reserve(mutable_view.size());
  for (auto& [name, m] : mutable_view) out.emplace_back(std::move(name), m);
  return out;
}

void Parameters::set_zero() {
  for (auto& [name, m] : named()) m->setZero();
}

void Parameters::add_scaled(const Parameters& other, double factor) {
  auto mine = named();
  auto theirs = other.named();
  for (std::size_t i = 0; i < mine.size(); ++i) {
    *mine[i].second += factor * *theirs[i].second;
  }
}

void Parameters::scale(double factor) {
  for (auto& [name, m] : named()) *m *= factor;
}

double Parameters::squared_norm() const {
  double total = 0.0;
  for (const auto& [name, m] : named()) total += m->squaredNorm();
  return total;
}

bool Parameters::all_finite() const {
  for (const auto& [name, m] : named()) {
    if (!m->allFinite()) return false;
  }
  return true;
}

std::size_t Parameters::count() const {
  std::size_t total = 0;
  for (const auto& [name, m] : named()) total += static_cast<std::size_t>(m->size());
  return total;
}

bool Parameters::bitwise_equal(const Parameters& other) const {
  auto mine = named();
  auto theirs = other.named();
  if (mine.size() != theirs.size()) return false;
  for (std::size_t i = 0; i < mine.size(); ++i) {
    const Matrix& a = *mine[i].second;
    const Matrix& b = *theirs[i].second;
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    if (std::memcmp(a.data(), b.data(),
                    sizeof(double) * static_cast<std::size_t>(a.size())) != 0) {
      return false;
    }
  }
  return true;
}

TinyLM::TinyLM(ModelConfig config, std::uint64_t seed)
    : config_(config), seed_(seed) {
  config_.validate();
  Rng rng(derive_seed(seed, "model_init"));
  const int d = config_.d_model;
  const double residual_std =
      kInitStd / std::sqrt(2.0 * static_cast<double>(config_.n_layers));
  params_ = Parameters::zeros(config_);
  params_.token_embedding = random_matrix(rng, config_.vocab_size, d, kInitStd);
  params_.position_embedding = random_matrix(rng, config_.max_len, d, kInitStd);
  for (LayerParameters& l : params_.layers) {
    l.ln1_gain = constant(1, d, 1.0);
    l.ln2_gain = constant(1, d, 1.0);
    l.wq = random_matrix(rng, d, d, kInitStd);
    l.wk = random_matrix(rng, d, d, kInitStd);
    l.wv = random_matrix(rng, d, d, kInitStd);
    l.wo = random_matrix(rng, d, d, residual_std);
    l.w1 = random_matrix(rng, d, config_.d_ff, kInitStd);
    l.w2 = random_matrix(rng, config_.d_ff, d, residual_std);
  }
  params_.final_gain = constant(1, d, 1.0);
  params_.output_head = random_matrix(rng, d, config_.vocab_size, kInitStd);
}

TinyLM::TinyLM(ModelConfig config, Parameters parameters, std::uint64_t seed)
    : config_(config), params_(std::move(parameters)), seed_(seed) {
  config_.validate();
  const Parameters reference = Parameters::zeros(config_);
  auto expected = reference.named();
  auto actual = params_.named();
  if (expected.size() != actual.size()) {
    throw ValidationError("parameter set does not match model config");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i].second->rows() != actual[i].second->rows() ||
        expected[i].second->cols() != actual[i].second->cols()) {
      throw ValidationError("parameter '" + expected[i].first +
                            "' has the wrong shape");
    }
  }
}

ForwardCache TinyLM::run(std::span<const TokenId> tokens, AttentionMode mode,
                         std::size_t logit_begin) const {
  const auto T = static_cast<Eigen::Index>(tokens.size());
  if (T == 0) throw ValidationError("empty token sequence");
  if (T > config_.max_len) {
    throw ValidationError("sequence of " + std::to_string(T) +
                          " tokens exceeds max_len " +
                          std::to_string(config_.max_len));
  }
  if (logit_begin > tokens.size()) {
    throw ValidationError("logit_begin past end of sequence");
  }
  const int d = config_.d_model;
  const int dh = config_.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  ForwardCache cache;
  cache.tokens.assign(tokens.begin(), tokens.end());
  cache.mode = mode;
  cache.logit_begin = logit_begin;

  Matrix x(T, d);
  for (Eigen::Index i = 0; i < T; ++i) {
    const TokenId id = tokens[static_cast<std::size_t>(i)];
    if (id < 0 || id >= config_.vocab_size) {
      throw ValidationError("token id " + std::to_string(id) +
                            " outside vocabulary");
    }
    x.row(i) = params_.token_embedding.row(id) + params_.position_embedding.row(i);
  }

  cache.layers.resize(params_.layers.size());
  for (std::size_t l = 0; l < params_.layers.size(); ++l) {
    const LayerParameters& p = params_.layers[l];
    LayerCache& c = cache.layers[l];
    c.input = x;
    layer_norm(x, p.ln1_gain, p.ln1_bias, c.ln1_xhat, c.ln1_rstd, c.ln1_out);
    c.q = affine(c.ln1_out, p.wq, p.bq);
    c.k = affine(c.ln1_out, p.wk, p.bk);
    c.v = affine(c.ln1_out, p.wv, p.bv);
    c.attn_out.resize(T, d);
    c.probs.resize(static_cast<std::size_t>(config_.n_heads));
    for (int h = 0; h < config_.n_heads; ++h) {
      Matrix scores = c.q.middleCols(h * dh, dh) *
                      c.k.middleCols(h * dh, dh).transpose() * scale;
      if (mode == AttentionMode::kCausal) {
        for (Eigen::Index i = 0; i < T; ++i) {
          for (Eigen::Index j = i + 1; j < T; ++j) {
            scores(i, j) = -std::numeric_limits<double>::infinity();
          }
        }
      }
      softmax_in_place(scores);
      c.attn_out.middleCols(h * dh, dh) = scores * c.v.middleCols(h * dh, dh);
      c.probs[static_cast<std::size_t>(h)] = std::move(scores);
    }
    x += affine(c.attn_out, p.wo, p.bo);
    layer_norm(x, p.ln2_gain, p.ln2_bias, c.ln2_xhat, c.ln2_rstd, c.ln2_out);
    c.ff_pre = affine(c.ln2_out, p.w1, p.b1);
    c.ff_act = c.ff_pre.unaryExpr([](double v) { return gelu(v); });
    x += affine(c.ff_act, p.w2, p.b2);
  }

  layer_norm(x, params_.final_gain, params_.final_bias, cache.final_xhat,
             cache.final_rstd, cache.hidden);
  const Eigen::Index logit_rows = T - static_cast<Eigen::Index>(logit_begin);
  if (logit_rows > 0) {
    cache.logits = cache.hidden.bottomRows(logit_rows) * params_.output_head;
  }
  return cache;
}

void TinyLM::backward(const ForwardCache& cache, const Matrix& d_logits,
                      const Matrix& d_hidden, Parameters& grads,
                      Matrix* d_input) const {
  const auto T = static_cast<Eigen::Index>(cache.length());
  const int d = config_.d_model;
  const int dh = config_.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  if (cache.layers.size() != params_.layers.size() || cache.hidden.rows() != T) {
    throw ValidationError("forward cache does not match this model");
  }

  Matrix dh_out = Matrix::Zero(T, d);
  if (d_logits.size() > 0) {
    const Eigen::Index rows = T - static_cast<Eigen::Index>(cache.logit_begin);
    if (d_logits.rows() != rows || d_logits.cols() != config_.vocab_size) {
      throw ValidationError("logit gradient shape mismatch");
    }
    grads.output_head += cache.hidden.bottomRows(rows).transpose() * d_logits;
    dh_out.bottomRows(rows) += d_logits * params_.output_head.transpose();
  }
  if (d_hidden.size() > 0) {
    if (d_hidden.rows() != T || d_hidden.cols() != d) {
      throw ValidationError("hidden-state gradient shape mismatch");
    }
    dh_out += d_hidden;
  }

  Matrix dx = layer_norm_backward(dh_out, cache.final_xhat, cache.final_rstd,
                                  params_.final_gain, grads.final_gain,
                                  grads.final_bias);

  for (std::size_t li = params_.layers.size(); li-- > 0;) {
    const LayerParameters& p = params_.layers[li];
    LayerParameters& g = grads.layers[li];
    const LayerCache& c = cache.layers[li];

    // Feed-forward branch.
    g.w2 += c.ff_act.transpose() * dx;
    g.b2.row(0) += dx.colwise().sum();
    Matrix d_pre = dx * p.w2.transpose();
    d_pre.array() *= c.ff_pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
    g.w1 += c.ln2_out.transpose() * d_pre;
    g.b1.row(0) += d_pre.colwise().sum();
    const Matrix d_ln2 = d_pre * p.w1.transpose();
    Matrix d_mid = dx + layer_norm_backward(d_ln2, c.ln2_xhat, c.ln2_rstd,
                                            p.ln2_gain, g.ln2_gain, g.ln2_bias);

    // Attention branch.
    g.wo += c.attn_out.transpose() * d_mid;
    g.bo.row(0) += d_mid.colwise().sum();
    const Matrix d_attn = d_mid * p.wo.transpose();
    Matrix dq(T, d), dk(T, d), dv(T, d);
    for (int h = 0; h < config_.n_heads; ++h) {
      const Matrix& probs = c.probs[static_cast<std::size_t>(h)];
      const auto d_head = d_attn.middleCols(h * dh, dh);
      dv.middleCols(h * dh, dh) = probs.transpose() * d_head;
      Matrix d_probs = d_head * c.v.middleCols(h * dh, dh).transpose();
      const Eigen::VectorXd row_dot =
          (d_probs.array() * probs.array()).rowwise().sum().matrix();
      Matrix d_scores = probs.array() * (d_probs.colwise() - row_dot).array();
      d_scores *= scale;
      dq.middleCols(h * dh, dh) = d_scores * c.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh) =
          d_scores.transpose() * c.q.middleCols(h * dh, dh);
    }
    g.wq += c.ln1_out.transpose() * dq;
    g.wk += c.ln1_out.transpose() * dk;
    g.wv += c.ln1_out.transpose() * dv;
    g.bq.row(0) += dq.colwise().sum();
    g.bk.row(0) += dk.colwise().sum();
    g.bv.row(0) += dv.colwise().sum();
    const Matrix d_ln1 =
        dq * p.wq.transpose() + dk * p.wk.transpose() + dv * p.wv.transpose();
    dx = d_mid + layer_norm_backward(d_ln1, c.ln1_xhat, c.ln1_rstd,
                                     p.ln1_gain, g.ln1_gain, g.ln1_bias);
  }

  for (Eigen::Index i = 0; i < T; ++i) {
    grads.token_embedding.row(cache.tokens[static_cast<std::size_t>(i)]) += dx.row(i);
    grads.position_embedding.row(i) += dx.row(i);
  }
  if (d_input != nullptr) *d_input = std::move(dx);
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix probs = logits;
  softmax_in_place(probs);
  return probs;
}

ConditionalForward forward(const TinyLM& model,
                           std::span<const TokenId> condition,
                           std::span<const TokenId> target) {
  if (target.empty()) throw ValidationError("empty target sequence");
  const std::size_t total = condition.size() + target.size();
  if (total > static_cast<std::size_t>(model.config().max_len)) {
    throw ValidationError("condition + target length " + std::to_string(total) +
                          " exceeds max_len " +
                          std::to_string(model.config().max_len));
  }
  // The last target token is never an input, so condition ++ sep ++
  // target[:-1] covers every prediction.
  TokenSequence input;
  input.reserve(total);
  input.insert(input.end(), condition.begin(), condition.end());
  input.push_back(Tokenizer::kSep);
  input.insert(input.end(), target.begin(), target.end() - 1);
  ConditionalForward out;
  out.cache = model.run(input, AttentionMode::kCausal, condition.size());
  out.probabilities = softmax_rows(out.cache.logits);
  return out;
}

Eigen::VectorXd embed_sequence(const TinyLM& model,
                               std::span<const TokenId> tokens,
                               ForwardCache* cache) {
  if (tokens.empty()) throw ValidationError("cannot embed an empty sequence");
  ForwardCache c = model.run(tokens, AttentionMode::kBidirectional, tokens.size());
  Eigen::VectorXd out = c.hidden.row(c.hidden.rows() - 1).transpose();
  if (cache != nullptr) *cache = std::move(c);
  return out;
}

Generation greedy_generate(const TinyLM& model,
                           std::span<const TokenId> condition, int max_new) {
  Generation gen;
  const auto max_len = static_cast<std::size_t>(model.config().max_len);
  TokenSequence input;
  std::span<const TokenId> kept = condition;
  // Keep room for the separator and at least one generated token.
  if (kept.size() + 2 > max_len) {
    kept = kept.subspan(kept.size() + 2 - max_len);
    gen.truncated = true;
  }
  input.assign(kept.begin(), kept.end());
  input.push_back(Tokenizer::kSep);
  for (int step = 0; step < max_new && input.size() <= max_len; ++step) {
    const ForwardCache cache =
        model.run(input, AttentionMode::kCausal, input.size() - 1);
    Eigen::Index best = 0;
    const auto row = cache.logits.row(0);
    for (Eigen::Index v = 1; v < row.size(); ++v) {
      if (row(v) > row(best)) best = v;
    }
    const auto next = static_cast<TokenId>(best);
    if (next == Tokenizer::kEos) {
      gen.finished = true;
      break;
    }
    gen.tokens.push_back(next);
    input.push_back(next);
  }
  return gen;
}

Parameters backward(const TinyLM& model, const ForwardCache& cache,
                    const Matrix& d_logits) {
  Parameters grads = Parameters::zeros(model.config());
  model.backward(cache, d_logits, Matrix(), grads);
  return grads;
}

}  // namespace termforge
