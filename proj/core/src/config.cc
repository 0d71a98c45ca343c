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

#include "termforge/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "termforge/errors.h"
#include "termforge/random.h"

namespace termforge {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void check_keys(const json& j, std::string_view where,
                std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) {
    throw ValidationError("config section '" + std::string(where) +
                          "' must be an object");
  }
  const std::set<std::string_view> ok(allowed);
  for (const auto& item : j.items()) {
    if (!ok.contains(item.key())) {
      throw ValidationError("unknown config key '" + std::string(where) + "." +
                            item.key() + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_path(const json& j, const char* key,
               std::optional<std::filesystem::path>& out) {
  if (j.contains(key) && !j.at(key).is_null()) {
    out = std::filesystem::path(j.at(key).get<std::string>());
  }
}

ordered_json path_json(const std::optional<std::filesystem::path>& p) {
  return p ? ordered_json(p->generic_string()) : ordered_json(nullptr);
}

ProviderChoice parse_provider(std::string_view s) {
  if (s == "hashing") return ProviderChoice::kHashing;
  if (s == "model") return ProviderChoice::kModel;
  if (s == "remote") return ProviderChoice::kRemote;
  throw ValidationError("unknown embedding provider '" + std::string(s) + "'");
}

ClientChoice parse_client(std::string_view s) {
  if (s == "offline") return ClientChoice::kOffline;
  if (s == "remote") return ClientChoice::kRemote;
  throw ValidationError("unknown generation client '" + std::string(s) + "'");
}

TokenizerChoice parse_tokenizer(std::string_view s) {
  if (s == "byte") return TokenizerChoice::kByte;
  if (s == "word") return TokenizerChoice::kWord;
  throw ValidationError("unknown tokenizer '" + std::string(s) + "'");
}

}  // namespace

std::string_view provider_choice_name(ProviderChoice c) {
  switch (c) {
    case ProviderChoice::kHashing: return "hashing";
    case ProviderChoice::kModel: return "model";
    case ProviderChoice::kRemote: return "remote";
  }
  return "unknown";
}

std::string_view client_choice_name(ClientChoice c) {
  return c == ClientChoice::kOffline ? "offline" : "remote";
}

std::string_view tokenizer_choice_name(TokenizerChoice c) {
  return c == TokenizerChoice::kByte ? "byte" : "word";
}

void PipelineConfig::validate() const {
  if (!(corpus.train_fraction > 0.0 && corpus.train_fraction < 1.0)) {
    throw ValidationError("corpus.train_fraction must be in (0, 1)");
  }
  for (double t : {graph.thresholds.theta_tok, graph.thresholds.theta_sen}) {
    if (!(t > 0.0 && t < 1.0)) {
      throw ValidationError("graph thresholds must be in (0, 1)");
    }
  }
  if (graph.hashing_dim == 0) throw ValidationError("graph.hashing_dim must be > 0");
  if (graph.provider == ProviderChoice::kModel && !graph.checkpoint) {
    throw ValidationError("graph.checkpoint is required for the model provider");
  }
  if (graph.provider == ProviderChoice::kRemote && graph.endpoint.empty()) {
    throw ValidationError("graph.endpoint is required for the remote provider");
  }
  if (augment.client == ClientChoice::kRemote && augment.endpoint.empty()) {
    throw ValidationError("augment.endpoint is required for the remote client");
  }
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (eval.max_new < 1) throw ValidationError("eval.max_new must be >= 1");
  if (retry.max_retries < 0) throw ValidationError("retry.max_retries must be >= 0");
  model.config.validate();
  train.validate();
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  try {
    check_keys(j, "<root>", {"seed", "workers", "paths", "corpus", "graph", "augment",
                             "model", "train", "eval", "retry"});
    read(j, "seed", c.seed);
    read(j, "workers", c.workers);
    if (j.contains("paths")) {
      const json& s = j.at("paths");
      check_keys(s, "paths", {"corpus", "lexicon"});
      read_path(s, "corpus", c.paths.corpus);
      read_path(s, "lexicon", c.paths.lexicon);
    }
    if (j.contains("corpus")) {
      const json& s = j.at("corpus");
      check_keys(s, "corpus", {"train_fraction"});
      read(s, "train_fraction", c.corpus.train_fraction);
    }
    if (j.contains("graph")) {
      const json& s = j.at("graph");
      check_keys(s, "graph", {"theta_tok", "theta_sen", "provider",
                              "hashing_dim", "hashing_seed", "endpoint", "model",
                              "checkpoint"});
      read(s, "theta_tok", c.graph.thresholds.theta_tok);
      read(s, "theta_sen", c.graph.thresholds.theta_sen);
      if (s.contains("provider")) {
        c.graph.provider = parse_provider(s.at("provider").get<std::string>());
      }
      read(s, "hashing_dim", c.graph.hashing_dim);
      read(s, "hashing_seed", c.graph.hashing_seed);
      read(s, "endpoint", c.graph.endpoint);
      read(s, "model", c.graph.model);
      read_path(s, "checkpoint", c.graph.checkpoint);
    }
    if (j.contains("augment")) {
      const json& s = j.at("augment");
      check_keys(s, "augment", {"client", "sen_cap", "tok_cap", "max_negatives",
                                "endpoint", "model", "temperature",
                                "prompts_dir"});
      if (s.contains("client")) {
        c.augment.client = parse_client(s.at("client").get<std::string>());
      }
      read(s, "sen_cap", c.augment.sen_cap);
      read(s, "tok_cap", c.augment.tok_cap);
      read(s, "max_negatives", c.augment.max_negatives);
      read(s, "endpoint", c.augment.endpoint);
      read(s, "model", c.augment.model);
      read(s, "temperature", c.augment.temperature);
      read_path(s, "prompts_dir", c.augment.prompts_dir);
    }
    if (j.contains("model")) {
      const json& s = j.at("model");
      check_keys(s, "model", {"d_model", "n_layers", "n_heads", "d_ff",
                              "max_len", "tokenizer", "max_words", "min_count"});
      read(s, "d_model", c.model.config.d_model);
      read(s, "n_layers", c.model.config.n_layers);
      read(s, "n_heads", c.model.config.n_heads);
      read(s, "d_ff", c.model.config.d_ff);
      read(s, "max_len", c.model.config.max_len);
      if (s.contains("tokenizer")) {
        c.model.tokenizer = parse_tokenizer(s.at("tokenizer").get<std::string>());
      }
      read(s, "max_words", c.model.max_words);
      read(s, "min_count", c.model.min_count);
    }
    if (j.contains("train")) {
      const json& s = j.at("train");
      check_keys(s, "train", {"lr", "tau", "batch_size", "epochs_per_stage",
                              "stage_epochs", "stage_lr", "grad_clip", "weight_decay", "skip_stages"});
      json t = s;
      t["seed"] = 0;
      c.train = TrainConfig::from_json(t);
    }
    if (j.contains("eval")) {
      const json& s = j.at("eval");
      check_keys(s, "eval", {"mode", "max_new", "with_qa"});
      if (s.contains("mode")) {
        c.eval.mode = parse_scoring_mode(s.at("mode").get<std::string>());
      }
      read(s, "max_new", c.eval.max_new);
      read(s, "with_qa", c.eval.with_qa);
    }
    if (j.contains("retry")) {
      const json& s = j.at("retry");
      check_keys(s, "retry", {"max_retries", "initial_delay_ms",
                              "backoff_factor", "max_delay_ms", "timeout_ms"});
      read(s, "max_retries", c.retry.max_retries);
      if (s.contains("initial_delay_ms")) {
        c.retry.initial_delay =
            std::chrono::milliseconds(s.at("initial_delay_ms").get<long>());
      }
      read(s, "backoff_factor", c.retry.backoff_factor);
      if (s.contains("max_delay_ms")) {
        c.retry.max_delay =
            std::chrono::milliseconds(s.at("max_delay_ms").get<long>());
      }
      if (s.contains("timeout_ms")) {
        c.retry.request_timeout =
            std::chrono::milliseconds(s.at("timeout_ms").get<long>());
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config: ") + e.what());
  }
  c.validate();
  return c;
}

ordered_json PipelineConfig::to_json() const {
  ordered_json j;
  j["seed"] = seed;
  j["workers"] = workers;
  j["paths"] = {{"corpus", path_json(paths.corpus)},
                {"lexicon", path_json(paths.lexicon)}};
  j["corpus"] = {{"train_fraction", corpus.train_fraction}};
  ordered_json g;
  g["theta_tok"] = graph.thresholds.theta_tok;
  g["theta_sen"] = graph.thresholds.theta_sen;
  g["provider"] = provider_choice_name(graph.provider);
  g["hashing_dim"] = graph.hashing_dim;
  g["hashing_seed"] = graph.hashing_seed;
  g["endpoint"] = graph.endpoint;
  g["model"] = graph.model;
  g["checkpoint"] = path_json(graph.checkpoint);
  j["graph"] = g;
  ordered_json a;
  a["client"] = client_choice_name(augment.client);
  a["sen_cap"] = augment.sen_cap;
  a["tok_cap"] = augment.tok_cap;
  a["max_negatives"] = augment.max_negatives;
  a["endpoint"] = augment.endpoint;
  a["model"] = augment.model;
  a["temperature"] = augment.temperature;
  a["prompts_dir"] = path_json(augment.prompts_dir);
  j["augment"] = a;
  ordered_json m;
  m["d_model"] = model.config.d_model;
  m["n_layers"] = model.config.n_layers;
  m["n_heads"] = model.config.n_heads;
  m["d_ff"] = model.config.d_ff;
  m["max_len"] = model.config.max_len;
  m["tokenizer"] = tokenizer_choice_name(model.tokenizer);
  m["max_words"] = model.max_words;
  m["min_count"] = model.min_count;
  j["model"] = m;
  ordered_json t = train.to_json();
  t.erase("seed");
  t.erase("workers");
  t.erase("stage_order");
  j["train"] = t;
  j["eval"] = {{"mode", scoring_mode_name(eval.mode)},
               {"max_new", eval.max_new},
               {"with_qa", eval.with_qa}};
  ordered_json r;
  r["max_retries"] = retry.max_retries;
  r["initial_delay_ms"] = retry.initial_delay.count();
  r["backoff_factor"] = retry.backoff_factor;
  r["max_delay_ms"] = retry.max_delay.count();
  r["timeout_ms"] = retry.request_timeout.count();
  j["retry"] = r;
  return j;
}

std::uint64_t PipelineConfig::split_seed() const { return derive_seed(seed, "split"); }
std::uint64_t PipelineConfig::model_seed() const { return derive_seed(seed, "model"); }
std::uint64_t PipelineConfig::train_seed() const { return derive_seed(seed, "train"); }
std::uint64_t PipelineConfig::eval_seed() const { return derive_seed(seed, "eval"); }

void resolve_config_paths(json& j, const std::filesystem::path& base) {
  static constexpr std::pair<const char*, const char*> kPathKeys[] = {
      {"paths", "corpus"},
      {"paths", "lexicon"},
      {"graph", "checkpoint"},
      {"augment", "prompts_dir"}};
  if (!j.is_object()) return;
  for (const auto& [section, key] : kPathKeys) {
    if (!j.contains(section) || !j[section].is_object()) continue;
    json& s = j[section];
    if (!s.contains(key) || !s[key].is_string()) continue;
    const std::filesystem::path p(s[key].get<std::string>());
    if (p.is_relative()) s[key] = (base / p).lexically_normal().generic_string();
  }
}

json read_config_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  resolve_config_paths(j, path.parent_path());
  return j;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return PipelineConfig::from_json(read_config_json(path));
}

}  // namespace termforge
