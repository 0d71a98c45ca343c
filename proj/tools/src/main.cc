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

// termforge: corpus -> graph -> augmented dataset -> staged training ->
// evaluation -> report, one subcommand per step plus `run` for all of them.

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "report.h"
#include "termforge/augment.h"
#include "termforge/checkpoint.h"
#include "termforge/config.h"
#include "termforge/corpus.h"
#include "termforge/errors.h"
#include "termforge/eval.h"
#include "termforge/graph.h"
#include "termforge/pipeline.h"
#include "termforge/trainer.h"
#include "workspace.h"

namespace termforge::tools {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct Flag {
  const char* name;
  const char* path;  // dotted config key
  const char* help;
};

// Shorthand flags for common keys; `--set key=value` reaches the rest.
constexpr Flag kFlags[] = {
    {"--seed", "seed", "Root seed"},
    {"--workers", "workers", "Worker threads"},
    {"--corpus", "paths.corpus", "Corpus JSONL"},
    {"--lexicon", "paths.lexicon", "Lexicon JSONL"},
    {"--train-fraction", "corpus.train_fraction", "Train share of the split"},
    {"--theta-tok", "graph.theta_tok", "Token-edge similarity threshold"},
    {"--theta-sen", "graph.theta_sen", "Sentence candidate threshold"},
    {"--provider", "graph.provider", "hashing | model | remote"},
    {"--embed-endpoint", "graph.endpoint", "Embedding endpoint URL"},
    {"--embed-checkpoint", "graph.checkpoint", "Checkpoint for the model provider"},
    {"--client", "augment.client", "offline | remote"},
    {"--llm-endpoint", "augment.endpoint", "Chat completion endpoint URL"},
    {"--llm-model", "augment.model", "Chat completion model name"},
    {"--prompts-dir", "augment.prompts_dir", "Directory with prompt templates"},
    {"--sen-cap", "augment.sen_cap", "Sentence samples per anchor"},
    {"--tok-cap", "augment.tok_cap", "Token samples per anchor"},
    {"--max-negatives", "augment.max_negatives", "Negatives per token sample"},
    {"--tokenizer", "model.tokenizer", "byte | word"},
    {"--lr", "train.lr", "Learning rate"},
    {"--tau", "train.tau", "Contrastive temperature"},
    {"--batch-size", "train.batch_size", "Batch size"},
    {"--epochs", "train.epochs_per_stage", "Epochs per stage"},
    {"--grad-clip", "train.grad_clip", "Global gradient norm clip"},
    {"--weight-decay", "train.weight_decay", "AdamW weight decay"},
    {"--mode", "eval.mode", "embedding_similarity | loglikelihood"},
    {"--max-new", "eval.max_new", "Max generated tokens for QA"},
};

// Numbers, booleans, null and arrays parse as JSON; anything else is a string.
json flag_value(const std::string& text) {
  try {
    json v = json::parse(text);
    if (!v.is_object()) return v;
  } catch (const json::exception&) {
  }
  return text;
}

void set_path(json& root, std::string_view dotted, json value) {
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key(dotted.substr(start, dot - start));
    if (key.empty()) throw ValidationError("bad config key '" + std::string(dotted) + "'");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string_view::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

struct Options {
  std::string config_path;
  std::string out = "termforge-out";
  std::map<std::string, std::string> flags;  // config path -> raw value
  std::vector<std::string> sets;
  std::vector<std::string> skip_stages;
  bool no_qa = false;
  bool quiet = false;
  // Step-specific.
  bool no_resume = false;
  std::string checkpoint;
  std::string results = "eval_results.json";
  std::string dataset;
};

PipelineConfig resolve_config(const Options& o) {
  json j = o.config_path.empty() ? json::object() : read_config_json(o.config_path);
  for (const auto& [path, raw] : o.flags) {
    json v = flag_value(raw);
    if ((std::string_view(path).starts_with("paths.") ||
         path == "graph.checkpoint" || path == "augment.prompts_dir") &&
        v.is_string()) {
      v = fs::absolute(v.get<std::string>()).lexically_normal().generic_string();
    }
    set_path(j, path, std::move(v));
  }
  if (!o.skip_stages.empty()) set_path(j, "train.skip_stages", o.skip_stages);
  if (o.no_qa) set_path(j, "eval.with_qa", false);
  for (const std::string& s : o.sets) {
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("--set expects key=value, got '" + s + "'");
    }
    set_path(j, s.substr(0, eq), flag_value(s.substr(eq + 1)));
  }
  return PipelineConfig::from_json(j);
}

class Runner {
 public:
  Runner(Options options, PipelineConfig config)
      : o_(std::move(options)), cfg_(std::move(config)), ws_{fs::path(o_.out)} {}

  void ingest() {
    std::vector<fs::path> inputs{cfg_.paths.corpus.value_or(fs::path())};
    if (!cfg_.paths.corpus) throw ValidationError("paths.corpus is not set (use --corpus)");
    if (cfg_.paths.lexicon) inputs.push_back(*cfg_.paths.lexicon);
    const StepRecord rec = begin("ingest", "", inputs, {ws_.corpus()},
                                 {"seed", "paths", "corpus"});
    const Corpus corpus = prepare_corpus(cfg_);
    save_corpus(corpus, ws_.corpus());
    log("ingest: " + std::to_string(corpus.size()) + " sentences, " +
        std::to_string(corpus.count(Split::kTrain)) + " train / " +
        std::to_string(corpus.count(Split::kTest)) + " test");
    write_manifest(ws_, rec, true);
  }

  void graph() {
    verify_inputs(ws_, "ingest", {ws_.corpus()});
    const StepRecord rec = begin("graph", "ingest", {ws_.corpus()},
                                 {ws_.graph(), ws_.graph_stats()}, {"graph"});
    const Corpus corpus = load_corpus(ws_.corpus());
    const auto provider = make_provider(cfg_);
    const SentenceGraph g = build_graph(corpus, *provider, cfg_.graph.thresholds);
    write_file(ws_.graph(), export_graph_jsonl(g));
    const GraphStats st = graph_stats(g);
    ordered_json stats;
    stats["nodes"] = st.nodes;
    stats["shared_entity_edges"] = st.shared_entity_edges;
    stats["same_category_edges"] = st.same_category_edges;
    stats["tok_edges"] = st.tok_edges;
    ordered_json hist = ordered_json::object();
    for (const auto& [degree, n] : st.degree_histogram) hist[std::to_string(degree)] = n;
    stats["degree_histogram"] = hist;
    write_file(ws_.graph_stats(), stats.dump(2) + "\n");
    log("graph: " + std::to_string(st.nodes) + " nodes, " +
        std::to_string(st.shared_entity_edges) + " shared-entity, " +
        std::to_string(st.same_category_edges) + " same-category, " +
        std::to_string(st.tok_edges) + " token edges");
    write_manifest(ws_, rec, true);
  }

  void augment() {
    verify_inputs(ws_, "graph", {ws_.graph()});
    verify_inputs(ws_, "ingest", {ws_.corpus()});
    const StepRecord rec =
        begin("augment", "graph", {ws_.corpus(), ws_.graph()},
              {ws_.dataset(), ws_.rejections()}, {"graph", "augment", "retry"});
    const Corpus corpus = load_corpus(ws_.corpus());
    std::vector<std::string> ids;
    for (const SentenceRecord& r : corpus.records()) ids.push_back(r.id);
    const SentenceGraph g =
        import_graph_jsonl(read_file(ws_.graph()), ids, cfg_.graph.thresholds);
    const auto provider = make_provider(cfg_);
    const auto generator = make_generator(cfg_);
    const AugmentResult r =
        augment_corpus(corpus, g, *provider, *generator, augment_config(cfg_));
    save_dataset(Dataset{r.q_sen, r.q_tok}, ws_.dataset());
    write_file(ws_.rejections(), serialize_rejections(r.rejections));
    log("augment: " + std::to_string(r.q_sen.size()) + " sentence and " +
        std::to_string(r.q_tok.size()) + " token samples, " +
        std::to_string(r.rejections.size()) + " rejected");
    write_manifest(ws_, rec, true);
  }

  void train() {
    verify_inputs(ws_, "augment", {ws_.dataset()});
    std::vector<fs::path> outputs{ws_.train_report(), ws_.model()};
    std::size_t index = 0;
    for (Stage stage : kStageOrder) {
      if (cfg_.train.skip_stages.contains(stage)) continue;
      outputs.push_back(ws_.checkpoints() / checkpoint_file_name(++index, stage));
    }
    const StepRecord rec = begin("train", "augment", {ws_.dataset()}, outputs,
                                 {"seed", "model", "train"});
    const Dataset dataset = load_dataset(ws_.dataset());
    const Tokenizer tokenizer = build_tokenizer(dataset, cfg_);
    TinyLM model = init_model(cfg_, tokenizer);
    const TrainSplit train = train_split(dataset);
    log("train: " + std::to_string(train.q_sen.size()) + " sentence / " +
        std::to_string(train.q_tok.size()) + " token training samples, vocab " +
        std::to_string(tokenizer.vocab_size()));
    PipelineOptions po;
    po.checkpoint_dir = ws_.checkpoints();
    po.resume = !o_.no_resume;
    fs::create_directories(ws_.checkpoints());
    po.on_stage = [this](Stage stage, const TinyLM&) {
      log("train: finished " + std::string(stage_name(stage)));
    };
    const TrainReport report = run_pipeline(model, tokenizer, train.q_sen,
                                            train.q_tok, train_config(cfg_), po);
    for (const StageResult& s : report.stages) {
      log("train: " + std::string(stage_name(s.stage)) +
          (s.resumed ? " (resumed)" : "") + " loss " +
          std::to_string(s.epoch_loss.front()) + " -> " +
          std::to_string(s.epoch_loss.back()) + ", " +
          std::to_string(s.seconds) + " s");
    }
    if (report.margin_before_sen && report.margin_after_sen) {
      log("train: sentence margin " + std::to_string(*report.margin_before_sen) +
          " -> " + std::to_string(*report.margin_after_sen));
    }
    write_file(ws_.model(), read_file(report.final_checkpoint));
    write_file(ws_.train_report(), report.to_json(false).dump(2) + "\n");
    write_manifest(ws_, rec, true);
  }

  void eval() {
    fs::path dataset_path = ws_.dataset();
    fs::path checkpoint = ws_.model();
    std::string parent = "train";
    if (o_.dataset.empty()) {
      verify_inputs(ws_, "augment", {dataset_path});
    } else {
      dataset_path = o_.dataset;
      parent.clear();
    }
    if (o_.checkpoint.empty()) {
      verify_inputs(ws_, "train", {checkpoint});
    } else {
      checkpoint = o_.checkpoint;
    }
    if (!parent.empty() && !fs::exists(ws_.manifest(parent))) parent.clear();
    const fs::path out = ws_.root / o_.results;
    const std::string step = o_.results == "eval_results.json"
                                 ? "eval"
                                 : "eval-" + fs::path(o_.results).stem().string();
    const StepRecord rec = begin(step, parent, {checkpoint, dataset_path}, {out},
                                 {"seed", "eval"});
    const Checkpoint ck = load_checkpoint(checkpoint);
    const Dataset dataset = load_dataset(dataset_path);
    const EvalResults r = evaluate(ck.model, ck.tokenizer, dataset, eval_options(cfg_));
    write_file(out, r.to_json().dump(2) + "\n");
    if (r.qca_sen) log("eval: sentence QCA accuracy " + std::to_string(r.qca_sen->scores.accuracy));
    if (r.qca_tok) log("eval: token QCA accuracy " + std::to_string(r.qca_tok->scores.accuracy));
    if (r.qa) log("eval: QA BLEU-1 " + std::to_string(r.qa->scores.bleu1));
    write_manifest(ws_, rec, true);
  }

  void report() {
    const auto load = [](const fs::path& p) {
      return fs::exists(p) ? json::parse(read_file(p)) : json();
    };
    const json train = load(ws_.train_report());
    const json eval = load(ws_.eval_results());
    if (train.is_null() && eval.is_null()) {
      throw ValidationError("nothing to report in " + ws_.root.string());
    }
    std::vector<fs::path> inputs;
    for (const fs::path& p : {ws_.train_report(), ws_.eval_results()}) {
      if (fs::exists(p)) inputs.push_back(p);
    }
    const std::string parent = fs::exists(ws_.manifest("eval")) ? "eval" : "";
    const fs::path dir = ws_.report_dir();
    const StepRecord rec =
        begin("report", parent, inputs,
              {dir / "summary.txt", dir / "metrics.csv", dir / "loss_curves.svg"}, {"seed"});
    const std::string table = summary_table(train, eval);
    write_file(ws_.report_dir() / "summary.txt", table);
    write_file(ws_.report_dir() / "metrics.csv", metrics_csv(train, eval));
    write_file(ws_.report_dir() / "loss_curves.svg", loss_curves_svg(train));
    write_manifest(ws_, rec, true);
    std::cout << table;
  }

  void run_all() {
    ingest();
    graph();
    augment();
    train();
    eval();
    report();
  }

 private:
  void log(const std::string& msg) const {
    if (!o_.quiet) std::cerr << msg << "\n";
  }

  StepRecord begin(std::string step, std::string parent,
                   std::vector<fs::path> inputs, std::vector<fs::path> outputs,
                   std::initializer_list<const char*> keys) const {
    const ordered_json full = cfg_.to_json();
    ordered_json config;
    for (const char* k : keys) config[k] = full.at(k);
    StepRecord rec{std::move(step), cfg_.seed, std::move(parent),
                   std::move(inputs), std::move(outputs), std::move(config)};
    write_manifest(ws_, rec, false);
    return rec;
  }

  Options o_;
  PipelineConfig cfg_;
  Workspace ws_;
};

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return err->exit_code();
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return 2;
  return 1;
}

int run(int argc, char** argv) {
  CLI::App app{"Terminology-aware fine-tuning pipeline for small language models"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("-c,--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("-o,--out", o.out, "Output directory")->capture_default_str();
  app.add_option("--set", o.sets, "Override any config key: section.key=value");
  app.add_option("--skip-stage", o.skip_stages, "Skip a training stage (sft, sen, tok)");
  app.add_flag("--no-qa", o.no_qa, "Skip free-generation QA scoring");
  app.add_flag("-q,--quiet", o.quiet, "Suppress progress output");
  for (const Flag& f : kFlags) {
    app.add_option_function<std::string>(
        f.name, [&o, path = f.path](const std::string& v) { o.flags[path] = v; },
        f.help);
  }

  std::function<void(Runner&)> action;
  auto add = [&](const char* name, const char* help, void (Runner::*fn)()) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->callback([&action, fn] { action = [fn](Runner& r) { (r.*fn)(); }; });
    return sub;
  };
  add("ingest", "Annotate entities and split the corpus", &Runner::ingest);
  add("graph", "Build the sentence graph", &Runner::graph);
  add("augment", "Generate sentence and token QCA samples", &Runner::augment);
  CLI::App* train = add("train", "Run the sft, sen and tok stages", &Runner::train);
  train->add_flag("--no-resume", o.no_resume, "Retrain even when checkpoints match");
  CLI::App* eval = add("eval", "Score a checkpoint on the test split", &Runner::eval);
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint to score instead of model.tfck")
      ->check(CLI::ExistingFile);
  eval->add_option("--dataset", o.dataset, "Dataset to score instead of dataset.jsonl")
      ->check(CLI::ExistingFile);
  eval->add_option("--results", o.results, "Results file name inside the output directory")
      ->capture_default_str();
  add("report", "Write summary table, CSV and loss plot", &Runner::report);
  CLI::App* all = add("run", "Run every step in order", &Runner::run_all);
  all->add_flag("--no-resume", o.no_resume, "Retrain even when checkpoints match");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    PipelineConfig cfg = resolve_config(o);
    DirectoryLock lock(o.out);
    Runner runner(o, std::move(cfg));
    action(runner);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "termforge: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace
}  // namespace termforge::tools

int main(int argc, char** argv) { return termforge::tools::run(argc, argv); }
