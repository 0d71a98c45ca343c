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

#include "termforge/trainer.h"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <thread>

#include "termforge/checkpoint.h"
#include "termforge/errors.h"
#include "termforge/optimizer.h"
#include "termforge/random.h"

namespace termforge {
namespace {

using ordered_json = nlohmann::ordered_json;

class Fnv64 {
 public:
  void add(std::string_view bytes) {
    for (unsigned char c : bytes) {
      h_ ^= c;
      h_ *= 0x100000001b3ULL;
    }
  }
  void add(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h_ ^= (bits >> (8 * i)) & 0xff;
      h_ *= 0x100000001b3ULL;
    }
  }
  std::string hex() const {
    static const char* kDigits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i) out[15 - i] = kDigits[(h_ >> (4 * i)) & 0xf];
    return out;
  }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

// Config as it affects results; the worker count does not.
ordered_json config_echo(const TrainConfig& config) {
  ordered_json j = config.to_json();
  j.erase("workers");
  return j;
}

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    for (std::size_t w = 0; w < count; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

TokenSequence encode_target(const Tokenizer& tokenizer, std::string_view text) {
  TokenSequence t = tokenizer.encode(text);
  t.push_back(Tokenizer::kEos);
  return t;
}

}  // namespace

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kSft: return "sft";
    case Stage::kSen: return "sen";
    case Stage::kTok: return "tok";
  }
  return "unknown";
}

Stage parse_stage(std::string_view name) {
  if (name == "sft") return Stage::kSft;
  if (name == "sen") return Stage::kSen;
  if (name == "tok") return Stage::kTok;
  throw ValidationError("unknown stage '" + std::string(name) + "'");
}

int TrainConfig::epochs_for(Stage stage) const {
  const auto it = stage_epochs.find(stage);
  return it == stage_epochs.end() ? epochs_per_stage : it->second;
}

double TrainConfig::lr_for(Stage stage) const {
  const auto it = stage_lr.find(stage);
  return it == stage_lr.end() ? lr : it->second;
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw ValidationError("lr must be finite and >= 0");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ValidationError("tau must be positive");
  }
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (epochs_per_stage < 1) {
    throw ValidationError("epochs_per_stage must be >= 1");
  }
  for (const auto& [stage, epochs] : stage_epochs) {
    if (epochs < 1) {
      throw ValidationError("stage_epochs." + std::string(stage_name(stage)) +
                            " must be >= 1");
    }
  }
  for (const auto& [stage, stage_rate] : stage_lr) {
    if (!(stage_rate >= 0.0) || !std::isfinite(stage_rate)) {
      throw ValidationError("stage_lr." + std::string(stage_name(stage)) +
                            " must be finite and >= 0");
    }
  }
  if (grad_clip && !(*grad_clip > 0.0)) {
    throw ValidationError("grad_clip must be positive");
  }
  if (!(weight_decay >= 0.0)) {
    throw ValidationError("weight_decay must be >= 0");
  }
  if (workers < 1) throw ValidationError("workers must be >= 1");
}

ordered_json TrainConfig::to_json() const {
  ordered_json j;
  j["lr"] = lr;
  j["tau"] = tau;
  j["batch_size"] = batch_size;
  j["epochs_per_stage"] = epochs_per_stage;
  ordered_json per_stage = ordered_json::object();
  for (Stage s : kStageOrder) per_stage[std::string(stage_name(s))] = epochs_for(s);
  j["stage_epochs"] = per_stage;
  ordered_json per_stage_lr = ordered_json::object();
  for (Stage s : kStageOrder) per_stage_lr[std::string(stage_name(s))] = lr_for(s);
  j["stage_lr"] = per_stage_lr;
  j["seed"] = seed;
  j["grad_clip"] = grad_clip ? ordered_json(*grad_clip) : ordered_json(nullptr);
  j["weight_decay"] = weight_decay;
  j["stage_order"] = {"sft", "sen", "tok"};
  std::vector<std::string> skip;
  for (Stage s : kStageOrder) {
    if (skip_stages.contains(s)) skip.emplace_back(stage_name(s));
  }
  j["skip_stages"] = skip;
  j["workers"] = workers;
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.lr = j.value("lr", c.lr);
    c.tau = j.value("tau", c.tau);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs_per_stage = j.value("epochs_per_stage", c.epochs_per_stage);
    if (j.contains("stage_epochs")) {
      for (const auto& [name, epochs] : j.at("stage_epochs").items()) {
        c.stage_epochs[parse_stage(name)] = epochs.get<int>();
      }
    }
    if (j.contains("stage_lr")) {
      for (const auto& [name, rate] : j.at("stage_lr").items()) {
        c.stage_lr[parse_stage(name)] = rate.get<double>();
      }
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("grad_clip") && !j.at("grad_clip").is_null()) {
      c.grad_clip = j.at("grad_clip").get<double>();
    }
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    if (j.contains("skip_stages")) {
      for (const auto& s : j.at("skip_stages")) {
        c.skip_stages.insert(parse_stage(s.get<std::string>()));
      }
    }
    c.workers = j.value("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad train config: ") + e.what());
  }
  c.validate();
  return c;
}

ordered_json StageResult::to_json(bool with_timing) const {
  ordered_json j;
  j["stage"] = stage_name(stage);
  j["samples"] = samples;
  j["steps"] = steps;
  j["epoch_loss"] = epoch_loss;
  j["rejected"] = rejected;
  if (with_timing) {
    j["seconds"] = seconds;
    j["resumed"] = resumed;
  }
  return j;
}

StageResult StageResult::from_json(const nlohmann::json& j) {
  StageResult r;
  r.stage = parse_stage(j.at("stage").get<std::string>());
  r.samples = j.at("samples").get<std::size_t>();
  r.steps = j.at("steps").get<std::size_t>();
  r.epoch_loss = j.at("epoch_loss").get<std::vector<double>>();
  r.rejected = j.at("rejected").get<std::vector<std::string>>();
  r.seconds = j.value("seconds", 0.0);
  r.resumed = j.value("resumed", false);
  return r;
}

std::string render_choices(std::string_view question,
                           std::span<const std::string> options) {
  std::string out(question);
  for (std::size_t i = 0; i < options.size(); ++i) {
    out += '\n';
    out += static_cast<char>('A' + i);
    out += ". ";
    out += options[i];
  }
  return out;
}

std::vector<SftExample> sft_examples(std::span<const SentenceQCA> q_sen,
                                     std::span<const TokenQCA> q_tok,
                                     const Tokenizer& tokenizer,
                                     std::uint64_t seed) {
  const std::uint64_t choice_seed = derive_seed(seed, "sft_choices");
  std::vector<SftExample> out;
  out.reserve(q_sen.size() + q_tok.size());
  std::size_t index = 0;
  auto add = [&](const std::string& question, const std::string& answer,
                 std::vector<std::string> options) {
    Rng rng(derive_seed(choice_seed, static_cast<std::uint64_t>(index++)));
    rng.shuffle(options);
    out.push_back({tokenizer.encode(render_choices(question, options)),
                   encode_target(tokenizer, answer)});
  };
  for (const SentenceQCA& s : q_sen) {
    std::vector<std::string> options{s.answer};
    options.insert(options.end(), s.negatives.begin(), s.negatives.end());
    add(s.question, s.answer, std::move(options));
  }
  for (const TokenQCA& s : q_tok) {
    std::vector<std::string> options{s.answer};
    options.insert(options.end(), s.negatives.begin(), s.negatives.end());
    add(s.question, s.answer, std::move(options));
  }
  return out;
}

std::vector<ContrastiveExample> contrastive_examples(
    std::span<const SentenceQCA> q_sen, const Tokenizer& tokenizer) {
  std::vector<ContrastiveExample> out;
  out.reserve(q_sen.size());
  for (const SentenceQCA& s : q_sen) {
    ContrastiveExample ex{tokenizer.encode(s.question),
                          tokenizer.encode(s.answer), {}};
    for (const std::string& n : s.negatives) {
      ex.negatives.push_back(tokenizer.encode(n));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<TokenContrastiveExample> token_examples(
    std::span<const TokenQCA> q_tok, const Tokenizer& tokenizer,
    std::vector<std::string>* rejected) {
  std::vector<TokenContrastiveExample> out;
  for (const TokenQCA& s : q_tok) {
    TokenContrastiveExample ex{tokenizer.encode(s.question),
                               tokenizer.encode(s.declarative), {}, {}};
    // Mid-sentence terms carry their leading space in word mode, so try that
    // spelling first.
    std::string prefix;
    for (const char* p : {" ", ""}) {
      TokenSequence answer = tokenizer.encode(p + s.answer);
      if (find_subsequence(ex.declarative, answer)) {
        ex.answer = std::move(answer);
        prefix = p;
        break;
      }
    }
    if (ex.answer.empty()) {
      if (rejected != nullptr) {
        rejected->push_back(s.anchor_id + ": answer '" + s.answer +
                            "' is not a token run of its declarative");
      }
      continue;
    }
    for (const std::string& n : s.negatives) {
      ex.negatives.push_back(tokenizer.encode(prefix + n));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

StageResult run_stage(TinyLM& model, Stage stage, std::size_t samples,
                      const SampleLoss& loss, const TrainConfig& config) {
  config.validate();
  if (samples == 0) {
    throw ValidationError("stage " + std::string(stage_name(stage)) +
                          " has no training samples");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const std::size_t steps_per_epoch = (samples + batch - 1) / batch;
  const std::size_t total_steps =
      steps_per_epoch * static_cast<std::size_t>(config.epochs_for(stage));

  AdamW optimizer(model.config(),
                  {config.lr_for(stage), 0.9, 0.999, 1e-8, config.weight_decay,
                   config.grad_clip},
                  total_steps);
  const std::uint64_t batch_seed =
      derive_seed(config.seed, "batches/" + std::string(stage_name(stage)));

  StageResult result;
  result.stage = stage;
  result.samples = samples;
  Parameters grads = Parameters::zeros(model.config());
  std::vector<Parameters> per_sample(std::min(batch, samples),
                                     Parameters::zeros(model.config()));
  std::vector<double> losses(per_sample.size());

  for (int epoch = 0; epoch < config.epochs_for(stage); ++epoch) {
    const std::vector<std::size_t> order = shuffled_indices(
        samples, derive_seed(batch_seed, static_cast<std::uint64_t>(epoch)));
    double epoch_total = 0.0;
    for (std::size_t b = 0; b < samples; b += batch) {
      const std::size_t n = std::min(batch, samples - b);
      parallel_for(n, config.workers, [&](std::size_t k) {
        per_sample[k].set_zero();
        losses[k] = loss(order[b + k], &per_sample[k]);
      });
      grads.set_zero();
      for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(losses[k])) {
          throw ValidationError("non-finite loss in stage " +
                                std::string(stage_name(stage)));
        }
        epoch_total += losses[k];
        grads.add_scaled(per_sample[k], 1.0);
      }
      optimizer.step(model.parameters(), grads);
      ++result.steps;
    }
    result.epoch_loss.push_back(epoch_total / static_cast<double>(samples));
  }
  if (!model.parameters().all_finite()) {
    throw ValidationError("parameters diverged in stage " +
                          std::string(stage_name(stage)));
  }
  result.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

StageResult sft_stage(TinyLM& model, const Tokenizer& tokenizer,
                      std::span<const SentenceQCA> q_sen,
                      std::span<const TokenQCA> q_tok,
                      const TrainConfig& config) {
  const std::vector<SftExample> examples =
      sft_examples(q_sen, q_tok, tokenizer, config.seed);
  if (examples.empty()) throw ValidationError("sft stage: no samples");
  return run_stage(
      model, Stage::kSft, examples.size(),
      [&](std::size_t i, Parameters* g) {
        return sft_loss(model, std::span(&examples[i], 1), g);
      },
      config);
}

StageResult sen_stage(TinyLM& model, const Tokenizer& tokenizer,
                      std::span<const SentenceQCA> q_sen,
                      const TrainConfig& config) {
  const std::vector<ContrastiveExample> examples =
      contrastive_examples(q_sen, tokenizer);
  if (examples.empty()) throw ValidationError("sen stage: no samples");
  const Temperature tau(config.tau);
  return run_stage(
      model, Stage::kSen, examples.size(),
      [&](std::size_t i, Parameters* g) {
        return sen_loss(model, examples[i], tau, g);
      },
      config);
}

StageResult tok_stage(TinyLM& model, const Tokenizer& tokenizer,
                      std::span<const TokenQCA> q_tok,
                      const TrainConfig& config) {
  std::vector<std::string> rejected;
  const std::vector<TokenContrastiveExample> examples =
      token_examples(q_tok, tokenizer, &rejected);
  if (examples.empty()) {
    throw ValidationError("tok stage: no valid samples (" +
                          std::to_string(rejected.size()) + " rejected)");
  }
  StageResult r = run_stage(
      model, Stage::kTok, examples.size(),
      [&](std::size_t i, Parameters* g) {
        return tok_loss(model, examples[i], g);
      },
      config);
  r.rejected = std::move(rejected);
  return r;
}

ordered_json TrainReport::to_json(bool with_timing) const {
  ordered_json j;
  j["config"] = config;
  j["lineage"] = lineage;
  ordered_json stages_json = ordered_json::array();
  for (const StageResult& s : stages) {
    stages_json.push_back(s.to_json(with_timing));
  }
  j["stages"] = stages_json;
  j["margin_before_sen"] =
      margin_before_sen ? ordered_json(*margin_before_sen) : ordered_json(nullptr);
  j["margin_after_sen"] =
      margin_after_sen ? ordered_json(*margin_after_sen) : ordered_json(nullptr);
  j["final_checkpoint"] = final_checkpoint.filename().generic_string();
  return j;
}

std::string checkpoint_file_name(std::size_t index, Stage stage) {
  return "stage-" + std::to_string(index) + "-" + std::string(stage_name(stage)) +
         ".tfck";
}

TrainReport run_pipeline(TinyLM& model, const Tokenizer& tokenizer,
                         std::span<const SentenceQCA> q_sen,
                         std::span<const TokenQCA> q_tok,
                         const TrainConfig& config,
                         const PipelineOptions& options) {
  config.validate();
  if (tokenizer.vocab_size() != model.config().vocab_size) {
    throw ValidationError("tokenizer and model vocab sizes differ");
  }
  if (config.skip_stages.size() == std::size(kStageOrder)) {
    throw ValidationError("every stage is skipped");
  }

  const ordered_json echo = config_echo(config);
  Fnv64 fp;
  fp.add(echo.dump());
  fp.add(tokenizer.to_json().dump());
  fp.add(model.config().to_json().dump());
  fp.add(serialize_dataset(q_sen, q_tok));
  for (const auto& [name, m] : model.parameters().named()) {
    fp.add(name);
    for (Eigen::Index i = 0; i < m->size(); ++i) fp.add(m->data()[i]);
  }
  const std::string fingerprint = fp.hex();
  if (options.checkpoint_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*options.checkpoint_dir, ec);
    if (ec) {
      throw IoError("cannot create " + options.checkpoint_dir->string() + ": " +
                    ec.message());
    }
  }

  TrainReport report;
  report.config = config.to_json();
  std::vector<ContrastiveExample> margin_set;
  std::size_t index = 0;
  for (Stage stage : kStageOrder) {
    if (config.skip_stages.contains(stage)) continue;
    ++index;
    std::vector<std::string> lineage = report.lineage;
    lineage.emplace_back(stage_name(stage));

    if (stage == Stage::kSen) {
      margin_set = contrastive_examples(q_sen, tokenizer);
      if (!margin_set.empty()) {
        report.margin_before_sen = embedding_margin(model, margin_set);
      }
    }

    std::optional<std::filesystem::path> path;
    if (options.checkpoint_dir) {
      path = *options.checkpoint_dir / checkpoint_file_name(index, stage);
    }
    std::optional<StageResult> result;
    if (path && options.resume && std::filesystem::exists(*path)) {
      Checkpoint ck = load_checkpoint(*path);
      if (ck.metadata.value("fingerprint", "") == fingerprint &&
          ck.lineage == lineage) {
        model = std::move(ck.model);
        result = StageResult::from_json(ck.metadata.at("stage"));
        result->resumed = true;
      }
    }
    if (!result) {
      switch (stage) {
        case Stage::kSft:
          result = sft_stage(model, tokenizer, q_sen, q_tok, config);
          break;
        case Stage::kSen:
          result = sen_stage(model, tokenizer, q_sen, config);
          break;
        case Stage::kTok:
          result = tok_stage(model, tokenizer, q_tok, config);
          break;
      }
      if (path) {
        Checkpoint ck{model, tokenizer, lineage, ordered_json::object()};
        ck.metadata["fingerprint"] = fingerprint;
        ck.metadata["config"] = echo;
        ck.metadata["stage"] = result->to_json(false);
        save_checkpoint(ck, *path);
      }
    }
    if (stage == Stage::kSen && !margin_set.empty()) {
      report.margin_after_sen = embedding_margin(model, margin_set);
    }
    report.lineage = std::move(lineage);
    report.stages.push_back(std::move(*result));
    if (path) report.final_checkpoint = *path;
    if (options.on_stage) options.on_stage(stage, model);
  }
  return report;
}

}  // namespace termforge
