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

#ifndef TERMFORGE_TOOLS_WORKSPACE_H_
#define TERMFORGE_TOOLS_WORKSPACE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace termforge::tools {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames, so readers never see a
// partial file.
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Exclusive lock on an output directory, held for the object's lifetime.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

// Fixed artifact names inside an output directory.
struct Workspace {
  std::filesystem::path root;

  std::filesystem::path corpus() const { return root / "corpus.jsonl"; }
  std::filesystem::path graph() const { return root / "graph.jsonl"; }
  std::filesystem::path graph_stats() const { return root / "graph_stats.json"; }
  std::filesystem::path dataset() const { return root / "dataset.jsonl"; }
  std::filesystem::path rejections() const { return root / "rejections.jsonl"; }
  std::filesystem::path checkpoints() const { return root / "checkpoints"; }
  std::filesystem::path model() const { return root / "model.tfck"; }
  std::filesystem::path train_report() const { return root / "train_report.json"; }
  std::filesystem::path eval_results() const { return root / "eval_results.json"; }
  std::filesystem::path report_dir() const { return root / "report"; }
  std::filesystem::path manifests() const { return root / "manifests"; }
  std::filesystem::path manifest(std::string_view step) const {
    return manifests() / (std::string(step) + ".json");
  }
};

// One manifest per step. Each records the hashes of its inputs, outputs
// and resolved config, plus the hash of the manifest of the step that
// produced its inputs, so a chain of runs can be audited end to end.
struct StepRecord {
  std::string step;
  std::uint64_t seed = 0;
  std::string parent;  // empty for the first step
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  nlohmann::ordered_json config;
};

// Called with complete=false before the step runs (outputs not hashed yet)
// and again with complete=true once its outputs exist.
void write_manifest(const Workspace& ws, const StepRecord& record, bool complete);

// Checks that every input still hashes to what the parent manifest
// recorded for it. Throws ValidationError on a mismatch.
void verify_inputs(const Workspace& ws, std::string_view parent,
                   const std::vector<std::filesystem::path>& inputs);

}  // namespace termforge::tools

#endif  // TERMFORGE_TOOLS_WORKSPACE_H_
