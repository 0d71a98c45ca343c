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

#ifndef TERMFORGE_CONFIG_H_
#define TERMFORGE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "termforge/augment.h"
#include "termforge/eval.h"
#include "termforge/graph.h"
#include "termforge/model.h"
#include "termforge/trainer.h"

namespace termforge {

enum class ProviderChoice { kHashing, kModel, kRemote };
enum class ClientChoice { kOffline, kRemote };
enum class TokenizerChoice { kByte, kWord };

struct PipelineConfig {
  std::uint64_t seed = 0;
  int workers = 1;

  // Inputs; relative paths resolve against the config file's directory.
  struct Paths {
    std::optional<std::filesystem::path> corpus;
    std::optional<std::filesystem::path> lexicon;
  } paths;

  struct Corpus {
    double train_fraction = 0.7;
  } corpus;

  struct Graph {
    GraphThresholds thresholds;
    ProviderChoice provider = ProviderChoice::kHashing;
    std::size_t hashing_dim = kDefaultHashingDim;
    std::uint64_t hashing_seed = 0;
    std::string endpoint;
    std::string model = "text-embedding";
    // Checkpoint whose model embeds sentences for the model provider.
    std::optional<std::filesystem::path> checkpoint;
  } graph;

  struct Augment {
    ClientChoice client = ClientChoice::kOffline;
    std::size_t sen_cap = 4;
    std::size_t tok_cap = 4;
    std::size_t max_negatives = 8;
    std::string endpoint;
    std::string model = "qwen-plus";
    double temperature = 0.0;
    std::optional<std::filesystem::path> prompts_dir;
  } augment;

  struct Model {
    ModelConfig config;
    TokenizerChoice tokenizer = TokenizerChoice::kWord;
    std::size_t max_words = 2000;
    std::size_t min_count = 1;
  } model;

  TrainConfig train;

  struct Eval {
    ScoringMode mode = ScoringMode::kEmbeddingSimilarity;
    int max_new = 48;
    bool with_qa = true;
  } eval;

  RetryPolicy retry;

  void validate() const;
  // Unknown keys are rejected so typos do not pass silently.
  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;

  // Named sub-seeds derived from `seed`.
  std::uint64_t split_seed() const;
  std::uint64_t model_seed() const;
  std::uint64_t train_seed() const;
  std::uint64_t eval_seed() const;
};

// Rewrites relative path fields against `base`.
void resolve_config_paths(nlohmann::json& j, const std::filesystem::path& base);
// Parses a config file with its relative paths resolved; no validation.
nlohmann::json read_config_json(const std::filesystem::path& path);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

std::string_view provider_choice_name(ProviderChoice c);
std::string_view client_choice_name(ClientChoice c);
std::string_view tokenizer_choice_name(TokenizerChoice c);

}  // namespace termforge

#endif  // TERMFORGE_CONFIG_H_
