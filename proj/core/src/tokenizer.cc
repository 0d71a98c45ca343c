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

#include "termforge/tokenizer.h"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "termforge/errors.h"

namespace termforge {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '-' || c >= 0x80;
}

}  // namespace

std::vector<std::string_view> word_pieces(std::string_view text) {
  std::vector<std::string_view> pieces;
  std::size_t i = 0;
  while (i < text.size()) {
    // One space directly before a word travels with it.
    const bool lead_space = text[i] == ' ' && i + 1 < text.size() &&
                            is_word_byte(static_cast<unsigned char>(text[i + 1]));
    if (!lead_space && !is_word_byte(static_cast<unsigned char>(text[i]))) {
      pieces.push_back(text.substr(i, 1));
      ++i;
      continue;
    }
    std::size_t j = lead_space ? i + 1 : i;
    while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) {
      ++j;
    }
    pieces.push_back(text.substr(i, j - i));
    i = j;
  }
  return pieces;
}

Tokenizer Tokenizer::byte_level() { return Tokenizer(); }

Tokenizer Tokenizer::word_level(std::span<const std::string> texts,
                                std::size_t max_words, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const std::string& text : texts) {
    for (std::string_view piece : word_pieces(text)) {
      if (piece.size() > 1) ++counts[std::string(piece)];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Tokenizer tok;
  tok.mode_ = TokenizerMode::kWordFallback;
  for (const auto& [word, count] : ranked) {
    if (tok.words_.size() >= max_words || count < min_count) break;
    tok.word_ids_.emplace(word, kByteVocabSize + static_cast<TokenId>(tok.words_.size()));
    tok.words_.push_back(word);
  }
  return tok;
}

TokenSequence Tokenizer::encode(std::string_view text) const {
  TokenSequence out;
  out.reserve(text.size());
  if (mode_ == TokenizerMode::kByte) {
    for (unsigned char c : text) out.push_back(static_cast<TokenId>(c));
    return out;
  }
  auto lookup = [&](std::string_view piece) -> TokenId {
    if (piece.size() < 2) return -1;
    auto it = word_ids_.find(std::string(piece));
    return it == word_ids_.end() ? -1 : it->second;
  };
  for (std::string_view piece : word_pieces(text)) {
    if (const TokenId id = lookup(piece); id >= 0) {
      out.push_back(id);
      continue;
    }
    if (piece.size() > 1 && piece[0] == ' ') {
      out.push_back(static_cast<TokenId>(' '));
      piece.remove_prefix(1);
      if (const TokenId id = lookup(piece); id >= 0) {
        out.push_back(id);
        continue;
      }
    }
    for (unsigned char c : piece) out.push_back(static_cast<TokenId>(c));
  }
  return out;
}

std::string Tokenizer::decode(std::span<const TokenId> tokens) const {
  std::string out;
  for (TokenId id : tokens) {
    if (id < 0 || id >= vocab_size()) {
      throw ValidationError("token id " + std::to_string(id) +
                            " outside vocabulary");
    }
    if (id < 256) {
      out.push_back(static_cast<char>(id));
    } else if (id >= kByteVocabSize) {
      out += words_[static_cast<std::size_t>(id - kByteVocabSize)];
    }
  }
  return out;
}

nlohmann::json Tokenizer::to_json() const {
  nlohmann::json j;
  j["mode"] = mode_ == TokenizerMode::kByte ? "byte" : "word";
  j["words"] = words_;
  return j;
}

Tokenizer Tokenizer::from_json(const nlohmann::json& j) {
  Tokenizer tok;
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "byte") {
    tok.mode_ = TokenizerMode::kByte;
  } else if (mode == "word") {
    tok.mode_ = TokenizerMode::kWordFallback;
  } else {
    throw ValidationError("unknown tokenizer mode '" + mode + "'");
  }
  for (const auto& w : j.at("words")) {
    tok.word_ids_.emplace(w.get<std::string>(),
                          kByteVocabSize + static_cast<TokenId>(tok.words_.size()));
    tok.words_.push_back(w.get<std::string>());
  }
  return tok;
}

}  // namespace termforge
