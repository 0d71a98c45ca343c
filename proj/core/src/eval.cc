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

#include "termforge/eval.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "termforge/embedding.h"
#include "termforge/errors.h"
#include "termforge/losses.h"
#include "termforge/utf8.h"

namespace termforge {
namespace {

using ordered_json = nlohmann::ordered_json;

template <typename Body>
void for_each_index(std::size_t n, int workers, Body body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    for (std::size_t w = 0; w < count; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Keeps the last `limit` tokens.
std::span<const TokenId> tail(const TokenSequence& tokens, std::size_t limit) {
  std::span<const TokenId> s(tokens);
  return s.size() > limit ? s.last(limit) : s;
}

ordered_json scores_json(const ClassificationScores& s) {
  ordered_json j;
  j["accuracy"] = s.accuracy;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["f1"] = s.f1;
  return j;
}

ordered_json qca_json(const std::optional<QcaResult>& r,
                      std::span<const QcaItem> items) {
  if (!r) return nullptr;
  ordered_json j;
  j["mode"] = scoring_mode_name(r->mode);
  j["count"] = r->records.size();
  j["aggregates"] = scores_json(r->scores);
  ordered_json samples = ordered_json::array();
  for (std::size_t i = 0; i < r->records.size(); ++i) {
    ordered_json s;
    s["anchor_id"] = items[i].anchor_id;
    s["options"] = items[i].options.size();
    s["answer"] = r->records[i].answer;
    s["chosen"] = r->records[i].chosen;
    s["correct"] = r->records[i].correct;
    samples.push_back(std::move(s));
  }
  j["samples"] = samples;
  return j;
}

}  // namespace

std::string_view scoring_mode_name(ScoringMode mode) {
  switch (mode) {
    case ScoringMode::kEmbeddingSimilarity: return "embedding_similarity";
    case ScoringMode::kLoglikelihood: return "loglikelihood";
  }
  return "unknown";
}

ScoringMode parse_scoring_mode(std::string_view name) {
  if (name == "embedding_similarity" || name == "embedding") {
    return ScoringMode::kEmbeddingSimilarity;
  }
  if (name == "loglikelihood") return ScoringMode::kLoglikelihood;
  throw ValidationError("unknown scoring mode '" + std::string(name) + "'");
}

std::vector<QcaItem> make_qca_items(std::span<const SentenceQCA> q_sen,
                                    std::span<const TokenQCA> q_tok,
                                    std::uint64_t seed) {
  const std::uint64_t position_seed = derive_seed(seed, "qca_positions");
  std::vector<QcaItem> out;
  std::size_t index = 0;
  auto add = [&](std::string kind, const std::string& anchor,
                 const std::string& question, const std::string& answer,
                 std::span<const std::string> negatives) {
    QcaItem item{std::move(kind), anchor, question, {}, 0};
    std::vector<std::size_t> order(negatives.size() + 1);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(position_seed, static_cast<std::uint64_t>(index++)));
    rng.shuffle(order);
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i] == 0) {
        item.answer_index = i;
        item.options.push_back(answer);
      } else {
        item.options.push_back(negatives[order[i] - 1]);
      }
    }
    out.push_back(std::move(item));
  };
  for (const SentenceQCA& s : q_sen) {
    add("sen", s.anchor_id, s.question, s.answer, s.negatives);
  }
  for (const TokenQCA& s : q_tok) {
    add("tok", s.anchor_id, s.question, s.answer, s.negatives);
  }
  return out;
}

std::size_t argmax_lowest(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("no options to choose from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

std::vector<double> EmbeddingChooser::scores(const QcaItem& item) const {
  const auto limit = static_cast<std::size_t>(model_.config().max_len);
  const Vector q =
      embed_with_model(model_, tail(tokenizer_.encode(item.question), limit));
  std::vector<double> out;
  for (const std::string& option : item.options) {
    out.push_back(cosine(
        q, embed_with_model(model_, tail(tokenizer_.encode(option), limit))));
  }
  return out;
}

std::size_t EmbeddingChooser::choose(const QcaItem& item) const {
  return argmax_lowest(scores(item));
}

std::vector<double> LoglikelihoodChooser::scores(const QcaItem& item) const {
  const auto limit = static_cast<std::size_t>(model_.config().max_len);
  const TokenSequence q = tokenizer_.encode(item.question);
  std::vector<double> out;
  for (const std::string& option : item.options) {
    const TokenSequence t = tokenizer_.encode(option);
    if (t.empty() || t.size() + 1 >= limit) {
      throw ValidationError("option does not fit the model context");
    }
    const ConditionalForward f = forward(model_, tail(q, limit - 1 - t.size()), t);
    double total = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
      total += std::log(std::max(
          f.probabilities(static_cast<Eigen::Index>(j), t[j]),
          kProbabilityEpsilon));
    }
    out.push_back(total / static_cast<double>(t.size()));
  }
  return out;
}

std::size_t LoglikelihoodChooser::choose(const QcaItem& item) const {
  return argmax_lowest(scores(item));
}

std::size_t RandomChooser::choose(const QcaItem& item) const {
  std::lock_guard lock(mu_);
  return rng_.index(item.options.size());
}

ClassificationScores classification_scores(std::span<const QcaRecord> records) {
  if (records.empty()) throw ValidationError("no QCA records to score");
  std::set<std::size_t> labels;
  std::map<std::size_t, std::size_t> tp, predicted, gold;
  std::size_t correct = 0;
  for (const QcaRecord& r : records) {
    labels.insert(r.answer);
    labels.insert(r.chosen);
    ++predicted[r.chosen];
    ++gold[r.answer];
    if (r.chosen == r.answer) {
      ++tp[r.answer];
      ++correct;
    }
  }
  ClassificationScores s;
  s.accuracy = static_cast<double>(correct) / static_cast<double>(records.size());
  for (std::size_t label : labels) {
    const double t = static_cast<double>(tp[label]);
    const double p = predicted[label] ? t / static_cast<double>(predicted[label]) : 0.0;
    const double r = gold[label] ? t / static_cast<double>(gold[label]) : 0.0;
    s.precision += p;
    s.recall += r;
    s.f1 += (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  const auto n = static_cast<double>(labels.size());
  s.precision /= n;
  s.recall /= n;
  s.f1 /= n;
  return s;
}

QcaResult score_qca(std::span<const QcaItem> items, const OptionChooser& chooser,
                    ScoringMode mode, int workers) {
  if (items.empty()) throw ValidationError("score_qca: empty sample set");
  for (const QcaItem& item : items) {
    if (item.options.size() < 2 || item.answer_index >= item.options.size()) {
      throw ValidationError("QCA item for '" + item.anchor_id +
                            "' needs at least two options and a valid answer");
    }
  }
  QcaResult result;
  result.mode = mode;
  result.records.resize(items.size());
  for_each_index(items.size(), workers, [&](std::size_t i) {
    const std::size_t chosen = chooser.choose(items[i]);
    if (chosen >= items[i].options.size()) {
      throw ValidationError("chooser returned an out-of-range option");
    }
    result.records[i] = {chosen, items[i].answer_index,
                         chosen == items[i].answer_index};
  });
  result.scores = classification_scores(result.records);
  return result;
}

QcaResult score_qca(const TinyLM& model, const Tokenizer& tokenizer,
                    std::span<const QcaItem> items, ScoringMode mode,
                    int workers) {
  if (mode == ScoringMode::kEmbeddingSimilarity) {
    return score_qca(items, EmbeddingChooser(model, tokenizer), mode, workers);
  }
  return score_qca(items, LoglikelihoodChooser(model, tokenizer), mode, workers);
}

std::vector<QaItem> make_qa_items(std::span<const SentenceQCA> q_sen,
                                  std::span<const TokenQCA> q_tok) {
  std::vector<QaItem> out;
  for (const SentenceQCA& s : q_sen) {
    out.push_back({"sen", s.anchor_id, s.question, s.answer});
  }
  for (const TokenQCA& s : q_tok) {
    out.push_back({"tok", s.anchor_id, s.question, s.declarative});
  }
  return out;
}

QaResult score_qa(const TinyLM& model, const Tokenizer& tokenizer,
                  std::span<const QaItem> items, int max_new, int workers) {
  if (items.empty()) throw ValidationError("score_qa: empty sample set");
  QaResult result;
  result.records.resize(items.size());
  for_each_index(items.size(), workers, [&](std::size_t i) {
    if (utf8::trim(items[i].reference).empty()) {
      throw ValidationError("QA reference is empty");
    }
    const Generation g =
        greedy_generate(model, tokenizer.encode(items[i].question), max_new);
    result.records[i] = {utf8::sanitize(tokenizer.decode(g.tokens)), g.truncated,
                         !g.finished};
  });
  std::vector<std::string> hyps, refs;
  for (std::size_t i = 0; i < items.size(); ++i) {
    hyps.push_back(result.records[i].generated);
    refs.push_back(items[i].reference);
  }
  result.scores = score_texts(hyps, refs);
  return result;
}

TestSets make_test_sets(const Dataset& dataset, std::uint64_t seed) {
  std::vector<SentenceQCA> sen;
  std::vector<TokenQCA> tok;
  std::copy_if(dataset.q_sen.begin(), dataset.q_sen.end(), std::back_inserter(sen),
               [](const SentenceQCA& s) { return s.split == Split::kTest; });
  std::copy_if(dataset.q_tok.begin(), dataset.q_tok.end(), std::back_inserter(tok),
               [](const TokenQCA& s) { return s.split == Split::kTest; });
  TestSets sets;
  sets.qca_sen = make_qca_items(sen, {}, seed);
  sets.qca_tok = make_qca_items({}, tok, derive_seed(seed, "tok"));
  sets.qa = make_qa_items(sen, tok);
  return sets;
}

EvalResults evaluate(const TinyLM& model, const Tokenizer& tokenizer,
                     const Dataset& dataset, const EvalOptions& options) {
  EvalResults r;
  r.options = options;
  r.sets = make_test_sets(dataset, options.seed);
  if (r.sets.qca_sen.empty() && r.sets.qca_tok.empty()) {
    throw ValidationError("dataset has no test-split samples");
  }
  if (!r.sets.qca_sen.empty()) {
    r.qca_sen = score_qca(model, tokenizer, r.sets.qca_sen, options.mode,
                          options.workers);
  }
  if (!r.sets.qca_tok.empty()) {
    r.qca_tok = score_qca(model, tokenizer, r.sets.qca_tok, options.mode,
                          options.workers);
  }
  if (options.with_qa) {
    r.qa = score_qa(model, tokenizer, r.sets.qa, options.max_new,
                    options.workers);
  }
  return r;
}

ordered_json EvalResults::to_json() const {
  ordered_json j;
  ordered_json cfg;
  cfg["mode"] = scoring_mode_name(options.mode);
  cfg["max_new"] = options.max_new;
  cfg["with_qa"] = options.with_qa;
  cfg["seed"] = options.seed;
  j["config"] = cfg;
  ordered_json qca;
  qca["sen"] = qca_json(qca_sen, sets.qca_sen);
  qca["tok"] = qca_json(qca_tok, sets.qca_tok);
  j["qca"] = qca;
  if (qa) {
    ordered_json q;
    q["count"] = qa->records.size();
    ordered_json agg;
    agg["bleu1"] = qa->scores.bleu1;
    agg["bleu4"] = qa->scores.bleu4;
    agg["rouge1"] = qa->scores.rouge1;
    agg["rougel"] = qa->scores.rougel;
    q["aggregates"] = agg;
    ordered_json samples = ordered_json::array();
    for (std::size_t i = 0; i < qa->records.size(); ++i) {
      ordered_json s;
      s["kind"] = sets.qa[i].kind;
      s["anchor_id"] = sets.qa[i].anchor_id;
      s["generated"] = qa->records[i].generated;
      s["truncated"] = qa->records[i].truncated;
      s["hit_limit"] = qa->records[i].hit_limit;
      samples.push_back(std::move(s));
    }
    q["samples"] = samples;
    j["qa"] = q;
  } else {
    j["qa"] = nullptr;
  }
  return j;
}

}  // namespace termforge
