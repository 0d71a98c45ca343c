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

#ifndef TERMFORGE_PIPELINE_H_
#define TERMFORGE_PIPELINE_H_

#include <memory>
#include <optional>
#include <vector>

#include "termforge/augment.h"
#include "termforge/config.h"
#include "termforge/corpus.h"
#include "termforge/embedding.h"
#include "termforge/eval.h"
#include "termforge/model.h"
#include "termforge/tokenizer.h"
#include "termforge/trainer.h"

// Glue from a PipelineConfig to the components each step needs.
namespace termforge {

// Annotates unlabelled records from the lexicon, then splits.
Corpus prepare_corpus(const Corpus& raw,
                      const std::optional<TermLexicon>& lexicon,
                      const PipelineConfig& config);
// Same, reading config.paths.
Corpus prepare_corpus(const PipelineConfig& config);

std::unique_ptr<EmbeddingProvider> make_provider(const PipelineConfig& config);
std::unique_ptr<QcaGenerator> make_generator(const PipelineConfig& config);

AugmentConfig augment_config(const PipelineConfig& config);
TrainConfig train_config(const PipelineConfig& config);
EvalOptions eval_options(const PipelineConfig& config);

struct TrainSplit {
  std::vector<SentenceQCA> q_sen;
  std::vector<TokenQCA> q_tok;
};
TrainSplit train_split(const Dataset& dataset);

// Vocabulary from training-split samples only, so test text never shapes it.
Tokenizer build_tokenizer(const Dataset& dataset, const PipelineConfig& config);
TinyLM init_model(const PipelineConfig& config, const Tokenizer& tokenizer);

}  // namespace termforge

#endif  // TERMFORGE_PIPELINE_H_
