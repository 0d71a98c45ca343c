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

#include "termforge/augment.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "termforge/errors.h"
#include "termforge/parsers.h"
#include "termforge/utf8.h"

namespace termforge {
namespace {

using ordered_json = nlohmann::ordered_json;

bool same_text(std::string_view a, std::string_view b) {
  return utf8::normalize_whitespace(a) == utf8::normalize_whitespace(b);
}

std::string replace_span(const std::string& text, std::size_t start,
                         std::size_t end, std::string_view with) {
  const std::size_t n = utf8::length(text);
  return utf8::substr(text, 0, start) + std::string(with) +
         utf8::substr(text, end, n);
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::string sentence_question(const SentenceRecord& anchor) {
  std::vector<std::string> terms;
  for (const EntityMention& m : anchor.entities) {
    if (std::find(terms.begin(), terms.end(), m.surface) == terms.end()) {
      terms.push_back(m.surface);
    }
    if (terms.size() == 2) break;
  }
  std::string q = "In " + anchor.category + ", ";
  if (terms.empty()) return q + "what does the rule state?";
  q += "what applies to the " + terms[0];
  if (terms.size() > 1) q += " and the " + terms[1];
  return q + "?";
}

}  // namespace

void SentenceQCA::validate() const {
  if (utf8::trim(question).empty() || utf8::trim(answer).empty()) {
    throw ValidationError("sentence sample for '" + anchor_id +
                          "' has an empty question or answer");
  }
  for (const std::string& n : negatives) {
    if (utf8::trim(n).empty()) {
      throw ValidationError("sentence sample for '" + anchor_id +
                            "' has an empty negative");
    }
    if (same_text(n, answer)) {
      throw ValidationError("sentence sample for '" + anchor_id +
                            "' has a negative equal to the answer");
    }
  }
}

void TokenQCA::validate() const {
  if (utf8::trim(question).empty() || utf8::trim(answer).empty() ||
      utf8::trim(declarative).empty()) {
    throw ValidationError("token sample for '" + anchor_id +
                          "' has an empty field");
  }
  if (declarative.find(answer) == std::string::npos) {
    throw ValidationError("answer '" + answer +
                          "' does not occur in its declarative sentence");
  }
  if (negatives.empty()) {
    throw ValidationError("token sample for '" + anchor_id +
                          "' has no negatives");
  }
  std::set<std::string> seen;
  for (const std::string& n : negatives) {
    if (utf8::trim(n).empty()) {
      throw ValidationError("token sample for '" + anchor_id +
                            "' has an empty negative");
    }
    if (n == answer) {
      throw ValidationError("token negative equals the answer '" + answer +
                            "'");
    }
    if (!seen.insert(n).second) {
      throw ValidationError("token negative '" + n + "' is repeated");
    }
  }
}

std::string blank_term(const SentenceRecord& anchor,
                       const EntityMention& term) {
  return replace_span(anchor.text, term.start, term.end, "____");
}

std::string negate_clause(std::string_view text) {
  static const std::set<std::string, std::less<>> kModals = {
      "shall", "must", "may", "should", "will", "can", "is", "are"};
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (kModals.contains(text.substr(i, j - i))) {
      return std::string(text.substr(0, j)) + " not" +
             std::string(text.substr(j));
    }
    i = j;
  }
  std::string rest(text);
  if (!rest.empty() && rest[0] >= 'A' && rest[0] <= 'Z') {
    rest[0] = static_cast<char>(rest[0] - 'A' + 'a');
  }
  return "It is not the case that " + rest;
}

std::string swap_entity(const SentenceRecord& anchor,
                        const SentenceRecord& negative,
                        const CandidateSets& candidates) {
  // A confusable term from the graph, if any.
  for (const EntityMention& m : anchor.entities) {
    auto it = candidates.c_tok.find(EntityRef::from(m));
    if (it == candidates.c_tok.end()) continue;
    for (const EntityRef& other : it->second) {
      if (other.surface != m.surface) {
        return replace_span(anchor.text, m.start, m.end, other.surface);
      }
    }
  }
  // Otherwise a term borrowed from the neighbour.
  if (!anchor.entities.empty()) {
    const EntityMention& m = anchor.entities.front();
    for (const EntityMention& n : negative.entities) {
      if (n.key() != m.key() && n.surface != m.surface) {
        return replace_span(anchor.text, m.start, m.end, n.surface);
      }
    }
  }
  // Last resort: the anchor's opening joined to the neighbour's ending.
  const std::vector<std::string> a = split_words(anchor.text);
  const std::vector<std::string> b = split_words(negative.text);
  std::vector<std::string> spliced(a.begin(), a.begin() + (a.size() + 1) / 2);
  spliced.insert(spliced.end(), b.begin() + b.size() / 2, b.end());
  return join_words(spliced);
}

std::vector<std::string> token_negatives(std::span<const EntityRef> confusable,
                                         std::string_view answer,
                                         std::size_t max_negatives) {
  std::vector<std::string> out;
  for (const EntityRef& e : confusable) {
    if (e.surface == answer) continue;
    if (std::find(out.begin(), out.end(), e.surface) != out.end()) continue;
    out.push_back(e.surface);
    if (max_negatives != 0 && out.size() == max_negatives) break;
  }
  return out;
}

TokenQCA OfflineGenerator::token(const SentenceRecord& anchor,
                                 const EntityMention& term,
                                 std::span<const EntityRef> confusable) const {
  TokenQCA s;
  s.question = "Which term completes: " + blank_term(anchor, term) + "?";
  s.answer = term.surface;
  s.negatives = token_negatives(confusable, term.surface, 0);
  s.declarative = anchor.text;
  s.anchor_id = anchor.id;
  s.split = anchor.split;
  return s;
}

SentenceQCA OfflineGenerator::sentence(const SentenceRecord& anchor,
                                       const SentenceRecord& negative,
                                       const CandidateSets& candidates) const {
  SentenceQCA s;
  s.question = sentence_question(anchor);
  s.answer = anchor.text;
  s.negatives = {negative.text, swap_entity(anchor, negative, candidates),
                 negate_clause(anchor.text)};
  s.anchor_id = anchor.id;
  s.negative_source_id = negative.id;
  s.split = anchor.split;
  return s;
}

LlmGenerator::LlmGenerator(const TextGenerator& client,
                           PromptTemplates templates)
    : client_(client), templates_(std::move(templates)) {}

TokenQCA LlmGenerator::token(const SentenceRecord& anchor,
                             const EntityMention& term,
                             std::span<const EntityRef> confusable) const {
  const std::string raw =
      client_.complete(render_token_prompt(anchor, term, templates_));
  TokenOutput out = parse_token_output(raw);
  if (!same_text(out.correct_answer, term.surface)) {
    throw ValidationError("generated answer '" + out.correct_answer +
                          "' differs from the term '" + term.surface + "'");
  }
  TokenQCA s;
  s.question = std::move(out.question);
  s.answer = term.surface;
  s.negatives = token_negatives(confusable, term.surface, 0);
  s.declarative = std::move(out.rephrased);
  s.anchor_id = anchor.id;
  s.split = anchor.split;
  return s;
}

SentenceQCA LlmGenerator::sentence(const SentenceRecord& anchor,
                                   const SentenceRecord& negative,
                                   const CandidateSets&) const {
  const std::string raw =
      client_.complete(render_sentence_prompt(anchor, negative, templates_));
  SentenceOutput out = parse_sentence_output(raw);
  if (out.answer_not_first) ++reordered_;
  SentenceQCA s;
  s.question = std::move(out.question);
  s.answer = out.choices[out.correct_index];
  s.negatives = out.negatives();
  s.anchor_id = anchor.id;
  s.negative_source_id = negative.id;
  s.split = anchor.split;
  return s;
}

TokenQCA generate_token_qca(const SentenceRecord& anchor,
                            const EntityMention& term,
                            std::span<const EntityRef> confusable,
                            const QcaGenerator& generator,
                            std::size_t max_negatives) {
  if (confusable.empty()) {
    throw ValidationError("term '" + term.surface + "' has no confusable terms");
  }
  TokenQCA s = generator.token(anchor, term, confusable);
  if (max_negatives != 0 && s.negatives.size() > max_negatives) {
    s.negatives.resize(max_negatives);
  }
  s.validate();
  return s;
}

std::vector<SentenceQCA> generate_sentence_qca(
    const SentenceRecord& anchor, std::span<const SentenceRecord> s_sen,
    const CandidateSets& candidates, const QcaGenerator& generator) {
  if (s_sen.empty()) {
    throw ValidationError("anchor '" + anchor.id + "' has no sentence candidates");
  }
  std::vector<SentenceQCA> out;
  out.reserve(s_sen.size());
  for (const SentenceRecord& neg : s_sen) {
    SentenceQCA s = generator.sentence(anchor, neg, candidates);
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

struct AnchorOutput {
  std::vector<SentenceQCA> q_sen;
  std::vector<TokenQCA> q_tok;
  std::vector<Rejection> rejections;
  bool remote_failure = false;
};

AnchorOutput augment_anchor(const Corpus& corpus, const SentenceGraph& graph,
                            const EmbeddingProvider& provider,
                            const QcaGenerator& generator,
                            const AugmentConfig& config,
                            const SentenceRecord& anchor) {
  AnchorOutput out;
  const CandidateSets cands =
      candidate_sets(graph, corpus, anchor.id, provider, config.theta_sen);
  auto reject = [&](std::string kind, std::string source, const Error& e) {
    if (e.kind() == ErrorKind::kRemote) out.remote_failure = true;
    out.rejections.push_back(
        {anchor.id, anchor.split, std::move(kind), std::move(source), e.what()});
  };

  const std::size_t n_sen = std::min(config.sen_cap, cands.s_sen.size());
  for (std::size_t i = 0; i < n_sen; ++i) {
    const SentenceRecord& neg = corpus.at(cands.s_sen[i]);
    try {
      SentenceQCA s = generator.sentence(anchor, neg, cands);
      s.validate();
      out.q_sen.push_back(std::move(s));
    } catch (const Error& e) {
      reject("sen", neg.id, e);
    }
  }

  std::set<EntityRef> done;
  for (const EntityMention& m : anchor.entities) {
    if (out.q_tok.size() >= config.tok_cap) break;
    const EntityRef ref = EntityRef::from(m);
    if (!done.insert(ref).second) continue;
    auto it = cands.c_tok.find(ref);
    if (it == cands.c_tok.end() || it->second.empty()) continue;
    try {
      out.q_tok.push_back(generate_token_qca(anchor, m, it->second, generator,
                                             config.max_negatives));
    } catch (const Error& e) {
      reject("tok", m.surface, e);
    }
  }
  return out;
}

}  // namespace

AugmentResult augment_corpus(const Corpus& corpus, const SentenceGraph& graph,
                             const EmbeddingProvider& provider,
                             const QcaGenerator& generator,
                             const AugmentConfig& config) {
  if (!corpus.is_split()) {
    throw ValidationError("augmentation needs a split corpus");
  }
  std::vector<const SentenceRecord*> anchors;
  for (Split split : {Split::kTrain, Split::kTest}) {
    for (const SentenceRecord& r : corpus.records()) {
      if (r.split == split) anchors.push_back(&r);
    }
  }

  std::vector<AnchorOutput> outputs(anchors.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < anchors.size(); i = next++) {
      outputs[i] = augment_anchor(corpus, graph, provider, generator, config,
                                  *anchors[i]);
    }
  };
  const int workers = std::max(1, config.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  AugmentResult result;
  bool remote_failure = false;
  for (AnchorOutput& o : outputs) {
    std::move(o.q_sen.begin(), o.q_sen.end(), std::back_inserter(result.q_sen));
    std::move(o.q_tok.begin(), o.q_tok.end(), std::back_inserter(result.q_tok));
    std::move(o.rejections.begin(), o.rejections.end(),
              std::back_inserter(result.rejections));
    remote_failure = remote_failure || o.remote_failure;
  }
  if (result.q_sen.empty() && result.q_tok.empty()) {
    const std::string msg = "augmentation produced no samples (" +
                            std::to_string(result.rejections.size()) +
                            " rejected)";
    if (remote_failure) throw RemoteError(msg);
    throw ValidationError(msg);
  }
  return result;
}

std::string serialize_dataset(std::span<const SentenceQCA> q_sen,
                              std::span<const TokenQCA> q_tok) {
  std::string out;
  for (const SentenceQCA& s : q_sen) {
    ordered_json j;
    j["kind"] = "sen";
    j["anchor_id"] = s.anchor_id;
    j["negative_source_id"] = s.negative_source_id;
    j["split"] = split_name(s.split);
    j["question"] = s.question;
    j["answer"] = s.answer;
    j["negatives"] = s.negatives;
    out += j.dump() + '\n';
  }
  for (const TokenQCA& s : q_tok) {
    ordered_json j;
    j["kind"] = "tok";
    j["anchor_id"] = s.anchor_id;
    j["split"] = split_name(s.split);
    j["question"] = s.question;
    j["answer"] = s.answer;
    j["declarative"] = s.declarative;
    j["negatives"] = s.negatives;
    out += j.dump() + '\n';
  }
  return out;
}

Dataset parse_dataset(std::string_view jsonl, std::string_view source) {
  Dataset d;
  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin < jsonl.size()) {
    std::size_t end = jsonl.find('\n', begin);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (utf8::trim(line).empty()) continue;
    const std::string where =
        std::string(source) + ":" + std::to_string(line_no);
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "sen") {
        SentenceQCA s;
        s.anchor_id = j.at("anchor_id").get<std::string>();
        s.negative_source_id = j.at("negative_source_id").get<std::string>();
        s.split = parse_split(j.at("split").get<std::string>());
        s.question = j.at("question").get<std::string>();
        s.answer = j.at("answer").get<std::string>();
        const auto negs = j.at("negatives").get<std::vector<std::string>>();
        if (negs.size() != 3) {
          throw ValidationError("sentence sample needs exactly 3 negatives");
        }
        std::copy(negs.begin(), negs.end(), s.negatives.begin());
        s.validate();
        d.q_sen.push_back(std::move(s));
      } else if (kind == "tok") {
        TokenQCA s;
        s.anchor_id = j.at("anchor_id").get<std::string>();
        s.split = parse_split(j.at("split").get<std::string>());
        s.question = j.at("question").get<std::string>();
        s.answer = j.at("answer").get<std::string>();
        s.declarative = j.at("declarative").get<std::string>();
        s.negatives = j.at("negatives").get<std::vector<std::string>>();
        s.validate();
        d.q_tok.push_back(std::move(s));
      } else {
        throw ValidationError("unknown sample kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return d;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), path.string());
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write dataset " + path.string());
  out << serialize_dataset(dataset.q_sen, dataset.q_tok);
  if (!out) throw IoError("write failed for " + path.string());
}

std::string serialize_rejections(std::span<const Rejection> rejections) {
  std::string out;
  for (const Rejection& r : rejections) {
    ordered_json j;
    j["anchor_id"] = r.anchor_id;
    j["split"] = split_name(r.split);
    j["kind"] = r.kind;
    j["source"] = r.source;
    j["reason"] = r.reason;
    out += j.dump() + '\n';
  }
  return out;
}

}  // namespace termforge
