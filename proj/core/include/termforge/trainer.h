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

#ifndef TERMFORGE_TRAINER_H_
#define TERMFORGE_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "termforge/augment.h"
#include "termforge/losses.h"
#include "termforge/model.h"
#include "termforge/tokenizer.h"

namespace termforge {

enum class Stage { kSft, kSen, kTok };

std::string_view stage_name(Stage stage);
Stage parse_stage(std::string_view name);

inline constexpr Stage kStageOrder[] = {Stage::kSft, Stage::kSen, Stage::kTok};

struct TrainConfig {
  double lr = 1e-3;
  double tau = 0.05;
  int batch_size = 16;
  int epochs_per_stage = 3;
  // Per-stage overrides of epochs_per_stage and lr.
  std::map<Stage, int> stage_epochs;
  std::map<Stage, double> stage_lr;
  std::uint64_t seed = 0;
  std::optional<double> grad_clip;
  double weight_decay = 0.01;
  std::set<Stage> skip_stages;
  int workers = 1;

  int epochs_for(Stage stage) const;
  double lr_for(Stage stage) const;
  void validate() const;
  nlohmann::ordered_json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct StageResult {
  Stage stage = Stage::kSft;
  std::vector<double> epoch_loss;  // mean loss per sample, per epoch
  std::size_t samples = 0;
  std::size_t steps = 0;
  double seconds = 0.0;
  std::vector<std::string> rejected;  // samples dropped before training
  bool resumed = false;               // restored from a checkpoint

  // Everything except wall-clock time, so it can live in checkpoints.
  nlohmann::ordered_json to_json(bool with_timing = true) const;
  static StageResult from_json(const nlohmann::json& j);
};

// Conditioning text for supervised fine-tuning: the question followed by
// the lettered options in a seeded order.
std::string render_choices(std::string_view question,
                           std::span<const std::string> options);

std::vector<SftExample> sft_examples(std::span<const SentenceQCA> q_sen,
                                     std::span<const TokenQCA> q_tok,
                                     const Tokenizer& tokenizer,
                                     std::uint64_t seed);
std::vector<ContrastiveExample> contrastive_examples(
    std::span<const SentenceQCA> q_sen, const Tokenizer& tokenizer);
// Samples whose answer does not tokenize to a contiguous run of the
// declarative's tokens are reported in `rejected` and skipped.
std::vector<TokenContrastiveExample> token_examples(
    std::span<const TokenQCA> q_tok, const Tokenizer& tokenizer,
    std::vector<std::string>* rejected = nullptr);

// Generic stage loop: seeded shuffled batches, summed per-sample losses,
// one AdamW step per batch with the rate decaying linearly to zero.
using SampleLoss = std::function<double(std::size_t, Parameters*)>;
StageResult run_stage(TinyLM& model, Stage stage, std::size_t samples,
                      const SampleLoss& loss, const TrainConfig& config);

StageResult sft_stage(TinyLM& model, const Tokenizer& tokenizer,
                      std::span<const SentenceQCA> q_sen,
                      std::span<const TokenQCA> q_tok,
                      const TrainConfig& config);
StageResult sen_stage(TinyLM& model, const Tokenizer& tokenizer,
                      std::span<const SentenceQCA> q_sen,
                      const TrainConfig& config);
StageResult tok_stage(TinyLM& model, const Tokenizer& tokenizer,
                      std::span<const TokenQCA> q_tok,
                      const TrainConfig& config);

struct TrainReport {
  std::vector<StageResult> stages;  // executed stages, in order
  std::vector<std::string> lineage;
  std::optional<double> margin_before_sen;
  std::optional<double> margin_after_sen;
  std::filesystem::path final_checkpoint;
  nlohmann::ordered_json config;

  // The checkpoint is named by file name only, so reports from different
  // output directories compare equal.
  nlohmann::ordered_json to_json(bool with_timing = true) const;
};

struct PipelineOptions {
  // When set, a checkpoint is written after every stage and existing ones
  // with a matching fingerprint are resumed instead of retrained.
  std::optional<std::filesystem::path> checkpoint_dir;
  bool resume = true;
  // Invoked after each completed or resumed stage.
  std::function<void(Stage, const TinyLM&)> on_stage;
};

std::string checkpoint_file_name(std::size_t index, Stage stage);

// Stages run strictly as sft -> sen -> tok; skipped stages are omitted.
TrainReport run_pipeline(TinyLM& model, const Tokenizer& tokenizer,
                         std::span<const SentenceQCA> q_sen,
                         std::span<const TokenQCA> q_tok,
                         const TrainConfig& config,
                         const PipelineOptions& options = {});

}  // namespace termforge

#endif  // TERMFORGE_TRAINER_H_
