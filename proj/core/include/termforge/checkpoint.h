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

#ifndef TERMFORGE_CHECKPOINT_H_
#define TERMFORGE_CHECKPOINT_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "termforge/model.h"
#include "termforge/tokenizer.h"

namespace termforge {

// Binary container: "TFCK", u32 version, u64 header length, a JSON header
// (config, tokenizer, lineage, tensor table), then every tensor as row-major
// little-endian f64 in the header's order.
struct Checkpoint {
  TinyLM model;
  Tokenizer tokenizer;
  std::vector<std::string> lineage;  // completed stages, in order
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::string_view bytes,
                            std::string_view source = "<memory>");

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace termforge

#endif  // TERMFORGE_CHECKPOINT_H_
