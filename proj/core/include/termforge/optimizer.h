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

#ifndef TERMFORGE_OPTIMIZER_H_
#define TERMFORGE_OPTIMIZER_H_

#include <cstddef>
#include <optional>

#include "termforge/model.h"

namespace termforge {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  std::optional<double> grad_clip;  // global L2 norm
};

// Decoupled weight decay, applied only to matrices (both dimensions > 1);
// biases and norm gains are not decayed.
class AdamW {
 public:
  AdamW(const ModelConfig& model, AdamWConfig config, std::size_t total_steps);

  // One update with the scheduled rate. Returns the rate used.
  double step(Parameters& params, Parameters& grads);

  std::size_t steps_taken() const { return t_; }
  // lr * (total - t) / total: starts at lr and reaches 0 after the last step.
  double scheduled_lr(std::size_t t) const;

 private:
  AdamWConfig config_;
  std::size_t total_steps_;
  std::size_t t_ = 0;
  Parameters m_, v_;
};

// Scales grads in place so their global norm is at most max_norm. Returns
// the norm before clipping.
double clip_grad_norm(Parameters& grads, double max_norm);

}  // namespace termforge

#endif  // TERMFORGE_OPTIMIZER_H_
