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

#include "termforge/pipeline.h"

#include <string>
#include <utility>

#include "termforge/checkpoint.h"
#include "termforge/errors.h"
#include "termforge/generation.h"
#include "termforge/prompts.h"

namespace termforge {
namespace {

// Keeps the checkpoint alive for the provider that borrows from it.
class CheckpointProvider final : public EmbeddingProvider {
 public:
  explicit CheckpointProvider(Checkpoint checkpoint)
      : checkpoint_(std::move(checkpoint)),
        inner_(checkpoint_.model, checkpoint_.tokenizer) {}
  std::size_t dim() const override { return inner_.dim(); }
  ProviderKind kind() const override { return ProviderKind::kModel; }
  Vector embed(std::string_view text) const override {
    return inner_.embed(text);
  }

 private:
  Checkpoint checkpoint_;
  ModelProvider inner_;
};

class RemoteQcaGenerator final : public QcaGenerator {
 public:
  RemoteQcaGenerator(ChatCompletionOptions options, PromptTemplates templates)
      : client_(std::move(options)), inner_(client_, std::move(templates)) {}
  TokenQCA token(const SentenceRecord& anchor, const EntityMention& term,
                 std::span<const EntityRef> confusable) const override {
    return inner_.token(anchor, term, confusable);
  }
  SentenceQCA sentence(const SentenceRecord& anchor,
                       const SentenceRecord& negative,
                       const CandidateSets& candidates) const override {
    return inner_.sentence(anchor, negative, candidates);
  }

 private:
  ChatCompletionClient client_;
  LlmGenerator inner_;
};

}  // namespace

Corpus prepare_corpus(const Corpus& raw,
                      const std::optional<TermLexicon>& lexicon,
                      const PipelineConfig& config) {
  const Corpus annotated = lexicon ? annotate_missing(raw, *lexicon) : raw;
  return split_corpus(annotated, config.corpus.train_fraction,
                      config.split_seed());
}

Corpus prepare_corpus(const PipelineConfig& config) {
  if (!config.paths.corpus) throw ValidationError("paths.corpus is not set");
  std::optional<TermLexicon> lexicon;
  if (config.paths.lexicon) lexicon = load_lexicon(*config.paths.lexicon);
  return prepare_corpus(load_corpus(*config.paths.corpus), lexicon, config);
}

std::unique_ptr<EmbeddingProvider> make_provider(const PipelineConfig& config) {
  switch (config.graph.provider) {
    case ProviderChoice::kHashing:
      return std::make_unique<HashingProvider>(config.graph.hashing_dim,
                                               config.graph.hashing_seed);
    case ProviderChoice::kModel:
      if (!config.graph.checkpoint) {
        throw ValidationError("graph.checkpoint is required for the model provider");
      }
      return std::make_unique<CheckpointProvider>(
          load_checkpoint(*config.graph.checkpoint));
    case ProviderChoice::kRemote: {
      RemoteEmbeddingOptions options;
      options.endpoint = config.graph.endpoint;
      options.model = config.graph.model;
      options.retry = config.retry;
      return std::make_unique<RemoteProvider>(std::move(options));
    }
  }
  throw ValidationError("unknown embedding provider");
}

std::unique_ptr<QcaGenerator> make_generator(const PipelineConfig& config) {
  if (config.augment.client == ClientChoice::kOffline) {
    return std::make_unique<OfflineGenerator>();
  }
  ChatCompletionOptions options;
  options.endpoint = config.augment.endpoint;
  options.model = config.augment.model;
  options.temperature = config.augment.temperature;
  options.retry = config.retry;
  PromptTemplates templates = config.augment.prompts_dir
                                  ? PromptTemplates::load(*config.augment.prompts_dir)
                                  : PromptTemplates::defaults();
  return std::make_unique<RemoteQcaGenerator>(std::move(options),
                                              std::move(templates));
}

AugmentConfig augment_config(const PipelineConfig& config) {
  AugmentConfig a;
  a.sen_cap = config.augment.sen_cap;
  a.tok_cap = config.augment.tok_cap;
  a.max_negatives = config.augment.max_negatives;
  a.theta_sen = config.graph.thresholds.theta_sen;
  a.workers = config.workers;
  return a;
}

TrainConfig train_config(const PipelineConfig& config) {
  TrainConfig t = config.train;
  t.seed = config.train_seed();
  t.workers = config.workers;
  return t;
}

EvalOptions eval_options(const PipelineConfig& config) {
  EvalOptions e;
  e.mode = config.eval.mode;
  e.max_new = config.eval.max_new;
  e.with_qa = config.eval.with_qa;
  e.seed = config.eval_seed();
  e.workers = config.workers;
  return e;
}

TrainSplit train_split(const Dataset& dataset) {
  TrainSplit out;
  for (const SentenceQCA& s : dataset.q_sen) {
    if (s.split == Split::kTrain) out.q_sen.push_back(s);
  }
  for (const TokenQCA& s : dataset.q_tok) {
    if (s.split == Split::kTrain) out.q_tok.push_back(s);
  }
  return out;
}

Tokenizer build_tokenizer(const Dataset& dataset, const PipelineConfig& config) {
  if (config.model.tokenizer == TokenizerChoice::kByte) {
    return Tokenizer::byte_level();
  }
  const TrainSplit train = train_split(dataset);
  std::vector<std::string> texts;
  for (const SentenceQCA& s : train.q_sen) {
    texts.push_back(s.question);
    texts.push_back(s.answer);
    texts.insert(texts.end(), s.negatives.begin(), s.negatives.end());
  }
  for (const TokenQCA& s : train.q_tok) {
    texts.push_back(s.question);
    texts.push_back(s.declarative);
    texts.insert(texts.end(), s.negatives.begin(), s.negatives.end());
  }
  return Tokenizer::word_level(texts, config.model.max_words,
                               config.model.min_count);
}

TinyLM init_model(const PipelineConfig& config, const Tokenizer& tokenizer) {
  ModelConfig mc = config.model.config;
  mc.vocab_size = tokenizer.vocab_size();
  return TinyLM(mc, config.model_seed());
}

}  // namespace termforge
