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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Pass criterion numbers to run a subset.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradcheck.h"
#include "oracles.h"
#include "parser_cases.h"
#include "termforge/augment.h"
#include "termforge/config.h"
#include "termforge/eval.h"
#include "termforge/graph.h"
#include "termforge/losses.h"
#include "termforge/metrics.h"
#include "termforge/parsers.h"
#include "termforge/pipeline.h"
#include "termforge/random.h"
#include "termforge/trainer.h"

namespace termforge::acceptance {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. Analytic gradients against central differences.
Outcome gradients() {
  const auto start = Clock::now();
  TinyLM model = testing::gradcheck_model(2024);
  const std::vector<SftExample> batch{{{11, 42, 7, 99, 3}, {65, 66, 67, 68}},
                                      {{5, 6}, {120, 121, 122}}};
  const ContrastiveExample ce{{72, 101, 108}, {108, 111, 32, 119}, {{97, 98}, {99, 100, 101}, {102}}};
  const MixedSequence mixed = mix(TokenSequence{40, 41, 42, 43, 44, 45}, TokenSequence{42, 43},
                                  TokenSequence{90, 91, 92});
  const TokenSequence condition{9, 8, 7, 6};
  const std::vector<std::pair<const char*, testing::LossFn>> losses{
      {"sft", [&](const TinyLM& m, Parameters* g) { return sft_loss(m, batch, g); }},
      {"sen", [&](const TinyLM& m, Parameters* g) { return sen_loss(m, ce, Temperature(0.1), g); }},
      {"mix", [&](const TinyLM& m, Parameters* g) { return mix_loss(m, mixed, condition, g); }},
  };
  bool ok = true;
  std::string detail;
  std::uint64_t seed = 1;
  for (const auto& [name, fn] : losses) {
    const auto r = testing::check_gradient(model, fn, 250, seed++, 1e-5, 1e-4);
    ok = ok && r.failures == 0 && r.coordinates >= 200;
    detail += fmt("%s max_rel=%.2e over %zu coords; ", name, r.max_relative_error, r.coordinates);
  }
  const double secs = seconds_since(start);
  ok = ok && secs < 120.0;
  return {ok, detail + fmt("%.1fs", secs)};
}

// 2. Closed-form loss identities.
Outcome identities() {
  const Eigen::VectorXd q = Eigen::VectorXd::Unit(4, 1);
  const std::vector<Eigen::VectorXd> negs(3, q);
  const double ln4 = sen_infonce(q, q, negs, Temperature(0.07)).loss;
  const bool a = std::abs(ln4 - std::log(4.0)) <= 1e-9;

  const TinyLM model = testing::gradcheck_model(7);
  const TokenSequence cond{1, 2, 3}, t{10, 11, 12, 13, 14};
  MixedSequence keep;
  keep.tokens = t;
  keep.mask.assign(t.size(), 1);
  const std::vector<SftExample> batch{{cond, t}};
  const double diff = std::abs(mix_loss(model, keep, cond) - sft_loss(model, batch));
  const bool b = diff <= 1e-12;

  const TokenContrastiveExample ex{{20, 21}, {30, 31, 32, 33}, {31, 32}, {{40}, {41, 42}, {43, 44, 45}}};
  double sum = 0.0;
  for (const TokenSequence& n : ex.negatives) {
    sum += mix_loss(model, ex.declarative, ex.answer, n, ex.question);
  }
  const bool c = tok_loss(model, ex) == sum;
  return {a && b && c, fmt("ln4 err=%.2e; mix-vs-sft diff=%.2e; tok bitwise=%s",
                           std::abs(ln4 - std::log(4.0)), diff, c ? "yes" : "no")};
}

// 3. Graph and candidate sets against the all-pairs oracle.
Outcome graph_oracle() {
  const auto start = Clock::now();
  HashingProvider provider;
  const GraphThresholds grid[] = {{0.8, 0.3}, {0.6, 0.5}, {0.9, 0.1}, {0.7, 0.7}, {0.5, 0.2}};
  std::size_t edges = 0, mismatches = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Corpus c = testing::random_corpus(seed, {.max_sentences = 100, .max_entities = 5});
    const GraphThresholds th = grid[seed % 5];
    const SentenceGraph g = build_graph(c, provider, th);
    const auto got = testing::flatten(g);
    edges += got.size();
    if (got != testing::brute_force_edges(c, provider, th)) ++mismatches;
    for (const SentenceRecord& r : c.records()) {
      if (!testing::same_candidates(candidate_sets(g, c, r.id, provider, th.theta_sen),
                                    testing::brute_force_candidates(c, r.id, provider, th))) {
        ++mismatches;
      }
    }
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs < 60.0,
          fmt("50 corpora, %zu directed edges, %zu mismatches, %.1fs", edges, mismatches, secs)};
}

// 4. Mix length, mask and reconstruction invariants.
Outcome mix_invariants() {
  Rng rng(4);
  std::size_t bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto draw = [&](std::size_t lo, std::size_t hi) {
      TokenSequence s(lo + rng.index(hi - lo + 1));
      for (TokenId& x : s) x = static_cast<TokenId>(rng.index(8));
      return s;
    };
    const TokenSequence pre = draw(0, 10), z_plus = draw(1, 5), post = draw(0, 10), z_minus = draw(1, 6);
    TokenSequence t = pre;
    t.insert(t.end(), z_plus.begin(), z_plus.end());
    t.insert(t.end(), post.begin(), post.end());
    const MixedSequence m = mix(t, z_plus, z_minus);
    const auto zeros = static_cast<std::size_t>(std::count(m.mask.begin(), m.mask.end(), 0));
    if (m.tokens.size() != t.size() - z_plus.size() + z_minus.size() ||
        m.mask.size() != m.tokens.size() || zeros != z_minus.size() || m.reconstruct() != t) {
      ++bad;
    }
  }
  return {bad == 0, fmt("1000 triples, %zu violations", bad)};
}

// 5. Scaled-down trend: contrastive stages beat SFT alone.
Outcome pipeline_trend(const fs::path& config_path) {
  const auto start = Clock::now();
  const PipelineConfig base = load_pipeline_config(config_path);
  int wins = 0, margin_up = 0, overfit = 0;
  double min_train = 1.0;
  std::string per_rep;
  for (int rep = 0; rep < 10; ++rep) {
    PipelineConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(rep);
    cfg.eval.with_qa = false;
    const Corpus corpus = prepare_corpus(cfg);
    const auto provider = make_provider(cfg);
    const SentenceGraph graph = build_graph(corpus, *provider, cfg.graph.thresholds);
    const auto generator = make_generator(cfg);
    const AugmentResult aug =
        augment_corpus(corpus, graph, *provider, *generator, augment_config(cfg));
    const Dataset dataset{aug.q_sen, aug.q_tok};
    const TrainSplit train = train_split(dataset);
    const Tokenizer tokenizer = build_tokenizer(dataset, cfg);
    TinyLM model = init_model(cfg, tokenizer);
    TinyLM sft_only;
    PipelineOptions opt;
    opt.on_stage = [&](Stage s, const TinyLM& m) {
      if (s == Stage::kSft) sft_only = m;
    };
    const TrainReport report =
        run_pipeline(model, tokenizer, train.q_sen, train.q_tok, train_config(cfg), opt);

    const bool up = report.margin_before_sen && report.margin_after_sen &&
                    *report.margin_after_sen > *report.margin_before_sen;
    const auto train_items = make_qca_items(train.q_sen, {}, cfg.eval_seed());
    const double train_acc =
        score_qca(model, tokenizer, train_items, ScoringMode::kEmbeddingSimilarity).scores.accuracy;
    const TestSets test = make_test_sets(dataset, cfg.eval_seed());
    const double full =
        score_qca(model, tokenizer, test.qca_sen, ScoringMode::kEmbeddingSimilarity).scores.accuracy;
    const double sft =
        score_qca(sft_only, tokenizer, test.qca_sen, ScoringMode::kEmbeddingSimilarity)
            .scores.accuracy;
    margin_up += up;
    overfit += train_acc >= 0.90;
    wins += full > sft;
    min_train = std::min(min_train, train_acc);
    per_rep += fmt("  rep %d: margin %.4f -> %.4f, train %.3f, test full %.3f vs sft %.3f\n", rep,
                   report.margin_before_sen.value_or(NAN), report.margin_after_sen.value_or(NAN),
                   train_acc, full, sft);
  }
  const double secs = seconds_since(start);
  std::fputs(per_rep.c_str(), stdout);
  const bool ok = margin_up == 10 && overfit == 10 && wins >= 7 && secs < 900.0;
  return {ok, fmt("margin up %d/10, train acc >= 0.90 %d/10 (min %.3f), full > sft %d/10, %.0fs",
                  margin_up, overfit, min_train, wins, secs)};
}

// 6. Text metrics against committed golden values.
Outcome metric_golden(const fs::path& path) {
  std::ifstream in(path);
  const nlohmann::json g = nlohmann::json::parse(in);
  double worst = 0.0;
  bool lcs_ok = true;
  std::vector<std::string> hyps, refs;
  for (const auto& p : g["pairs"]) {
    hyps.push_back(p["hypothesis"]);
    refs.push_back(p["reference"]);
    const Words h = metric_tokens(hyps.back()), r = metric_tokens(refs.back());
    const std::vector<Words> hs{h}, rs{r};
    const BleuScores b = corpus_bleu(hs, rs);
    for (const auto& [got, key] : {std::pair{b.bleu1, "bleu1"}, {b.bleu4, "bleu4"},
                                   {rouge1_f(h, r), "rouge1"}, {rougel_f(h, r), "rougel"}}) {
      worst = std::max(worst, std::abs(got - p[key].get<double>()));
    }
    lcs_ok = lcs_ok && lcs_length(h, r) == p["lcs"].get<std::size_t>();
  }
  const TextScores s = score_texts(hyps, refs);
  const auto& c = g["corpus"];
  for (const auto& [got, key] : {std::pair{s.bleu1, "bleu1"}, {s.bleu4, "bleu4"},
                                 {s.rouge1, "rouge1"}, {s.rougel, "rougel"}}) {
    worst = std::max(worst, std::abs(got - c[key].get<double>()));
  }
  const std::vector<Words> bh{{"the", "cat"}}, br{{"the", "cat", "sat"}};
  const double bp = corpus_bleu(bh, br).bleu1;
  const bool ok = worst <= 1e-9 && lcs_ok && std::abs(bp - 0.6065306597126334) <= 1e-9 &&
                  g["pairs"].size() == 10;
  return {ok, fmt("%zu pairs, max abs err %.1e, brevity case bleu1=%.10f", g["pairs"].size(),
                  worst, bp)};
}

// 7. Generator output parsing.
Outcome parsers() {
  std::size_t good = 0, typed = 0;
  std::vector<std::string> problems;
  try {
    const TokenOutput a = parse_token_output(
        "<Question>: Which officer keeps the minutes of board meetings?\n"
        "<Correct Answer>: Board secretary\n"
        "<Rephrased Sentence>: The officer who keeps the minutes of board meetings is the Board "
        "secretary.\n");
    const std::vector<EntityRef> conf{{"T2", "Director"}, {"T3", "Board of directors"}};
    SentenceRecord anchor{"x", "The Board secretary keeps the minutes.", {{"Board secretary", 4, 19, "T1"}},
                          "governance", Split::kTrain};
    const TokenQCA s = generate_token_qca(anchor, anchor.entities[0], conf, OfflineGenerator());
    good += a.correct_answer == "Board secretary" && s.negatives.size() == 2;
    const TokenOutput b = parse_token_output(
        "<Question>: What is the term used for staff who oversee a unit?\n"
        "<Correct Answer>: Supervisor\n"
        "<Rephrased Sentence>: Staff who oversee a unit are called Supervisor.");
    const std::vector<std::string> negs = token_negatives(
        std::vector<EntityRef>{{"T5", "External supervisor"}, {"T6", "Inspector"}}, b.correct_answer, 0);
    good += b.question == "What is the term used for staff who oversee a unit?" && negs.size() == 2;
    const SentenceOutput c = parse_sentence_output(testing::kSentenceBlock);
    good += c.correct_index == 0 && c.negatives().size() == 3 && !c.answer_not_first;
  } catch (const std::exception& e) {
    problems.push_back(e.what());
  }
  const auto cases = testing::malformed_cases();
  for (const auto& m : cases) {
    try {
      if (m.sentence) {
        parse_sentence_output(m.raw);
      } else {
        parse_token_output(m.raw);
      }
      problems.push_back(std::string(m.name) + " parsed");
    } catch (const ParseError& e) {
      if (e.kind() == m.kind) {
        ++typed;
      } else {
        problems.push_back(std::string(m.name) + " gave " +
                           std::string(parse_error_kind_name(e.kind())));
      }
    }
  }
  std::string detail = fmt("%zu/3 well-formed, %zu/%zu malformed typed", good, typed, cases.size());
  for (const auto& p : problems) detail += "; " + p;
  return {good == 3 && typed == 20 && cases.size() == 20, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 8. Two identical CLI runs produce identical artifacts.
Outcome determinism(const fs::path& config_path) {
  const auto start = Clock::now();
  const fs::path root = fs::temp_directory_path() / "termforge_acceptance_determinism";
  fs::remove_all(root);
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string(TERMFORGE_CLI_PATH) + " -q -c " + config_path.string() +
                            " -o " + (root / run).string() + " run >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      return {false, fmt("run %s exited with status %d", run, status)};
    }
  }
  std::vector<fs::path> files{"corpus.jsonl", "graph.jsonl", "graph_stats.json", "dataset.jsonl",
                              "rejections.jsonl", "model.tfck", "train_report.json",
                              "eval_results.json", "report/metrics.csv"};
  for (const auto& e : fs::directory_iterator(root / "a" / "checkpoints")) {
    files.push_back(fs::path("checkpoints") / e.path().filename());
  }
  std::size_t differing = 0;
  std::string which;
  for (const fs::path& f : files) {
    const bool present = fs::exists(root / "a" / f) && fs::exists(root / "b" / f);
    if (!present || slurp(root / "a" / f) != slurp(root / "b" / f)) {
      ++differing;
      which += " " + f.string();
    }
  }
  fs::remove_all(root);
  return {differing == 0,
          fmt("%zu files compared, %zu differ%s, %.0fs", files.size(), differing, which.c_str(),
              seconds_since(start))};
}

}  // namespace
}  // namespace termforge::acceptance

int main(int argc, char** argv) {
  using namespace termforge::acceptance;
  const fs::path data = TERMFORGE_TEST_DATA_DIR;
  const fs::path config = data / "config" / "pipeline.json";
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradients},
      {"loss identities", identities},
      {"graph oracle", graph_oracle},
      {"mix invariants", mix_invariants},
      {"pipeline trend", [&] { return pipeline_trend(config); }},
      {"metric oracles", [&] { return metric_golden(data / "golden" / "metrics_golden.json"); }},
      {"parser round-trips", parsers},
      {"determinism", [&] { return determinism(config); }},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(n)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", n, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
