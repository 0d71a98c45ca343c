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

#include "termforge/optimizer.h"

#include <cmath>

#include "termforge/errors.h"

namespace termforge {

AdamW::AdamW(const ModelConfig& model, AdamWConfig config,
             std::size_t total_steps)
    : config_(config),
      total_steps_(total_steps),
      m_(Parameters::zeros(model)),
      v_(Parameters::zeros(model)) {
  if (!(config.lr >= 0.0) || !std::isfinite(config.lr)) {
    throw ValidationError("learning rate must be finite and >= 0");
  }
  if (total_steps == 0) throw ValidationError("optimizer needs at least one step");
}

double AdamW::scheduled_lr(std::size_t t) const {
  if (t >= total_steps_) return 0.0;
  return config_.lr * static_cast<double>(total_steps_ - t) /
         static_cast<double>(total_steps_);
}

double AdamW::step(Parameters& params, Parameters& grads) {
  if (config_.grad_clip) clip_grad_norm(grads, *config_.grad_clip);
  const double lr = scheduled_lr(t_);
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));

  auto p = params.named();
  auto g = grads.named();
  auto m = m_.named();
  auto v = v_.named();
  for (std::size_t i = 0; i < p.size(); ++i) {
    Matrix& P = *p[i].second;
    const Matrix& G = *g[i].second;
    Matrix& M = *m[i].second;
    Matrix& V = *v[i].second;
    M = config_.beta1 * M + (1.0 - config_.beta1) * G;
    V = config_.beta2 * V + (1.0 - config_.beta2) * G.cwiseProduct(G);
    if (lr == 0.0) continue;
    const bool decay = P.rows() > 1 && P.cols() > 1;
    if (decay && config_.weight_decay != 0.0) {
      P *= 1.0 - lr * config_.weight_decay;
    }
    P.array() -= lr * (M.array() / bc1) /
                 ((V.array() / bc2).sqrt() + config_.eps);
  }
  return lr;
}

double clip_grad_norm(Parameters& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm && norm > 0.0) grads.scale(max_norm / norm);
  return norm;
}

}  // namespace termforge
