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

#include "termforge/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "termforge/errors.h"

namespace termforge {
namespace {

constexpr char kMagic[4] = {'T', 'F', 'C', 'K'};

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) {
    throw ValidationError("checkpoint is truncated");
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<unsigned char>(bytes[pos + i]))
             << (8 * i);
  }
  pos += sizeof(T);
  return value;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  const TinyLM& model = checkpoint.model;
  nlohmann::ordered_json header;
  header["model"] = model.config().to_json();
  header["seed"] = model.seed();
  header["tokenizer"] = checkpoint.tokenizer.to_json();
  header["lineage"] = checkpoint.lineage;
  header["metadata"] = checkpoint.metadata;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  for (const auto& [name, m] : model.parameters().named()) {
    tensors.push_back({{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});
  }
  header["tensors"] = tensors;
  const std::string text = header.dump();

  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out += text;
  for (const auto& [name, m] : model.parameters().named()) {
    const double* data = m->data();
    for (Eigen::Index i = 0; i < m->size(); ++i) {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(data[i]));
    }
  }
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes, std::string_view source) {
  const std::string where(source);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ValidationError(where + ": not a checkpoint file");
  }
  std::size_t pos = 4;
  const auto version = get_le<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) {
    throw ValidationError(where + ": unsupported checkpoint version " +
                          std::to_string(version));
  }
  const auto header_len = get_le<std::uint64_t>(bytes, pos);
  if (pos + header_len > bytes.size()) {
    throw ValidationError(where + ": checkpoint header is truncated");
  }
  nlohmann::ordered_json header;
  try {
    header = nlohmann::ordered_json::parse(bytes.substr(pos, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(where + ": bad checkpoint header: " + e.what());
  }
  pos += header_len;

  Checkpoint ck;
  try {
    const ModelConfig config = ModelConfig::from_json(header.at("model"));
    Parameters params = Parameters::zeros(config);
    auto named = params.named();
    const auto& table = header.at("tensors");
    if (table.size() != named.size()) {
      throw ValidationError("tensor count does not match the model config");
    }
    for (std::size_t i = 0; i < named.size(); ++i) {
      Matrix& m = *named[i].second;
      if (table[i].at("name").get<std::string>() != named[i].first ||
          table[i].at("rows").get<Eigen::Index>() != m.rows() ||
          table[i].at("cols").get<Eigen::Index>() != m.cols()) {
        throw ValidationError("tensor " + named[i].first +
                              " does not match the model config");
      }
      double* data = m.data();
      for (Eigen::Index k = 0; k < m.size(); ++k) {
        data[k] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
      }
    }
    if (pos != bytes.size()) {
      throw ValidationError("trailing bytes after the last tensor");
    }
    ck.model = TinyLM(config, std::move(params),
                      header.at("seed").get<std::uint64_t>());
    ck.tokenizer = Tokenizer::from_json(header.at("tokenizer"));
    ck.lineage = header.at("lineage").get<std::vector<std::string>>();
    ck.metadata = header.at("metadata");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(where + ": bad checkpoint header: " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  if (ck.tokenizer.vocab_size() != ck.model.config().vocab_size) {
    throw ValidationError(where + ": tokenizer and model vocab sizes differ");
  }
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str(), path.string());
}

}  // namespace termforge
