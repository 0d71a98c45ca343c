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

#include <gtest/gtest.h>

#include "termforge/errors.h"

namespace termforge {
namespace {

ModelConfig tiny() {
  ModelConfig c;
  c.d_model = 8;
  c.n_layers = 1;
  c.n_heads = 2;
  c.d_ff = 8;
  c.max_len = 8;
  return c;
}

Parameters filled(const ModelConfig& c, double value) {
  Parameters p = Parameters::zeros(c);
  for (auto& [name, m] : p.named()) m->setConstant(value);
  return p;
}

TEST(AdamW, LinearDecaySchedule) {
  const AdamW opt(tiny(), {.lr = 0.1}, 4);
  EXPECT_DOUBLE_EQ(opt.scheduled_lr(0), 0.1);
  EXPECT_DOUBLE_EQ(opt.scheduled_lr(2), 0.05);
  EXPECT_DOUBLE_EQ(opt.scheduled_lr(3), 0.025);
  EXPECT_EQ(opt.scheduled_lr(4), 0.0);
  EXPECT_EQ(opt.scheduled_lr(100), 0.0);
}

TEST(AdamW, FirstStepHandValues) {
  const ModelConfig c = tiny();
  AdamWConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.5;
  AdamW opt(c, cfg, 10);
  Parameters p = filled(c, 1.0);
  Parameters g = filled(c, 2.0);
  EXPECT_DOUBLE_EQ(opt.step(p, g), 0.01);
  EXPECT_EQ(opt.steps_taken(), 1u);
  // Bias-corrected first step moves by lr * g / (|g| + eps).
  const double adam = 0.01 * 2.0 / (2.0 + 1e-8);
  EXPECT_NEAR(p.final_bias(0, 0), 1.0 - adam, 1e-15);
  // Matrices also decay: p (1 - lr wd) - adam.
  EXPECT_NEAR(p.output_head(0, 0), 1.0 * (1.0 - 0.01 * 0.5) - adam, 1e-15);
  EXPECT_NEAR(p.layers[0].wq(1, 1), 1.0 * (1.0 - 0.01 * 0.5) - adam, 1e-15);
  EXPECT_NEAR(p.layers[0].ln1_gain(0, 3), 1.0 - adam, 1e-15);
}

TEST(AdamW, ZeroLearningRateLeavesParameters) {
  const ModelConfig c = tiny();
  AdamW opt(c, {.lr = 0.0}, 3);
  Parameters p = filled(c, 0.3);
  const Parameters before = p;
  for (int i = 0; i < 3; ++i) {
    Parameters g = filled(c, 1.0 + i);
    opt.step(p, g);
  }
  EXPECT_TRUE(p.bitwise_equal(before));
}

TEST(AdamW, RejectsBadConfig) {
  EXPECT_THROW(AdamW(tiny(), {.lr = -1.0}, 3), ValidationError);
  EXPECT_THROW(AdamW(tiny(), {.lr = std::nan("")}, 3), ValidationError);
  EXPECT_THROW(AdamW(tiny(), {}, 0), ValidationError);
}

TEST(ClipGradNorm, ScalesOnlyAboveThreshold) {
  const ModelConfig c = tiny();
  Parameters g = filled(c, 1.0);
  const double norm = std::sqrt(static_cast<double>(g.count()));
  EXPECT_DOUBLE_EQ(clip_grad_norm(g, 2.0 * norm), norm);
  EXPECT_EQ(g.final_bias(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(clip_grad_norm(g, 1.0), norm);
  EXPECT_NEAR(std::sqrt(g.squared_norm()), 1.0, 1e-12);
}

}  // namespace
}  // namespace termforge
