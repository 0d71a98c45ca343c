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

// Drives the installed command line tool end to end on a tiny config.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TERMFORGE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root = fs::temp_directory_path() /
           ("termforge_cli_" + std::string(::testing::UnitTest::GetInstance()
                                               ->current_test_info()
                                               ->name()));
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path data = TERMFORGE_TEST_DATA_DIR;
    const json cfg{
        {"seed", 3},
        {"paths",
         {{"corpus", (data / "synthetic/corpus.jsonl").string()},
          {"lexicon", (data / "synthetic/lexicon.jsonl").string()}}},
        {"graph", {{"theta_sen", 0.35}}},
        {"augment", {{"sen_cap", 1}, {"tok_cap", 1}}},
        {"model", {{"d_model", 16}, {"n_layers", 1}, {"n_heads", 2}, {"d_ff", 32}}},
        {"train", {{"epochs_per_stage", 1}, {"batch_size", 32}}},
        {"eval", {{"max_new", 4}}}};
    config = root / "tiny.json";
    std::ofstream(config) << cfg.dump(2);
    out = root / "out";
  }
  void TearDown() override { fs::remove_all(root); }

  std::string base() const { return "-q -c " + config.string() + " -o " + out.string(); }

  fs::path root, config, out;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("run --no-such-flag"), 1);
}

TEST_F(CliTest, ConfigAndInputErrorsMapToExitCodes) {
  EXPECT_EQ(run_cli(base() + " --set graph.theta_sen=7 ingest"), 1);
  EXPECT_EQ(run_cli(base() + " --set nope.key=1 ingest"), 1);
  EXPECT_EQ(run_cli(base() + " --corpus " + (root / "missing.jsonl").string() + " ingest"), 2);
  // Steps refuse to run before their parent step.
  EXPECT_EQ(run_cli(base() + " graph"), 1);
}

TEST_F(CliTest, StepsWriteArtifactsAndManifests) {
  ASSERT_EQ(run_cli(base() + " run"), 0);
  for (const char* f : {"corpus.jsonl", "graph.jsonl", "graph_stats.json", "dataset.jsonl",
                        "rejections.jsonl", "model.tfck", "train_report.json",
                        "eval_results.json", "report/summary.txt", "report/metrics.csv",
                        "report/loss_curves.svg"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_FALSE(fs::exists(out / ".termforge.lock"));
  for (const char* step : {"ingest", "graph", "augment", "train", "eval", "report"}) {
    const json m = json::parse(slurp(out / "manifests" / (std::string(step) + ".json")));
    EXPECT_EQ(m["status"], "complete") << step;
    EXPECT_EQ(m["seed"], 3) << step;
    EXPECT_TRUE(m.contains("config_sha256")) << step;
  }
  const json train = json::parse(slurp(out / "manifests/train.json"));
  EXPECT_EQ(train["parent"]["step"], "augment");
  const json results = json::parse(slurp(out / "eval_results.json"));
  EXPECT_TRUE(results["qca"]["sen"].is_object());

  // Re-scoring with an explicit results name leaves the default file alone.
  const std::string before = slurp(out / "eval_results.json");
  ASSERT_EQ(run_cli(base() + " eval --results rescore.json"), 0);
  EXPECT_EQ(slurp(out / "rescore.json"), before);
  EXPECT_TRUE(fs::exists(out / "manifests/eval-rescore.json"));
}

TEST_F(CliTest, TamperedInputIsRejected) {
  ASSERT_EQ(run_cli(base() + " ingest"), 0);
  ASSERT_EQ(run_cli(base() + " graph"), 0);
  ASSERT_EQ(run_cli(base() + " augment"), 0);
  std::ofstream(out / "dataset.jsonl", std::ios::app) << "\n";
  EXPECT_EQ(run_cli(base() + " train"), 1);
}

TEST_F(CliTest, LockedDirectoryIsRefused) {
  fs::create_directories(out);
  std::ofstream(out / ".termforge.lock") << "123\n";
  EXPECT_EQ(run_cli(base() + " ingest"), 2);
  fs::remove(out / ".termforge.lock");
  EXPECT_EQ(run_cli(base() + " ingest"), 0);
}

TEST_F(CliTest, GoldenCheckpointScoresExactly) {
  const fs::path toy = fs::path(TERMFORGE_TEST_DATA_DIR) / "golden" / "toy";
  ASSERT_EQ(run_cli("-q -c " + (toy / "config.json").string() + " -o " + out.string() +
                    " eval --checkpoint " + (toy / "model.tfck").string() + " --dataset " +
                    (toy / "dataset.jsonl").string() + " --results golden.json"),
            0);
  EXPECT_EQ(slurp(out / "golden.json"), slurp(toy / "eval_results.json"));
}

}  // namespace
