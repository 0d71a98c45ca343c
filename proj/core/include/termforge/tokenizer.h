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

#ifndef TERMFORGE_TOKENIZER_H_
#define TERMFORGE_TOKENIZER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace termforge {

using TokenId = std::int32_t;
using TokenSequence = std::vector<TokenId>;

enum class TokenizerMode { kByte, kWordFallback };

// Byte-level tokenizer with four specials after the 256 byte ids. The word
// mode adds whole-word ids on top and falls back to bytes for unknown words;
// punctuation and other whitespace stay byte tokens, so decode(encode(x))
// == x in both modes.
class Tokenizer {
 public:
  static constexpr TokenId kPad = 256;
  static constexpr TokenId kBos = 257;
  static constexpr TokenId kEos = 258;
  static constexpr TokenId kSep = 259;
  static constexpr int kByteVocabSize = 260;

  Tokenizer() = default;

  static Tokenizer byte_level();
  // Vocabulary of the most frequent words (ties broken lexicographically).
  static Tokenizer word_level(std::span<const std::string> texts,
                              std::size_t max_words,
                              std::size_t min_count = 1);

  TokenizerMode mode() const { return mode_; }
  int vocab_size() const {
    return kByteVocabSize + static_cast<int>(words_.size());
  }
  const std::vector<std::string>& words() const { return words_; }

  TokenSequence encode(std::string_view text) const;
  // Special tokens are dropped.
  std::string decode(std::span<const TokenId> tokens) const;
  static bool is_special(TokenId id) { return id >= kPad && id <= kSep; }

  nlohmann::json to_json() const;
  static Tokenizer from_json(const nlohmann::json& j);

  friend bool operator==(const Tokenizer& a, const Tokenizer& b) {
    return a.mode_ == b.mode_ && a.words_ == b.words_;
  }

 private:
  TokenizerMode mode_ = TokenizerMode::kByte;
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> word_ids_;
};

// Word pieces used by the word-level mode: runs of letters, digits, '-' and
// bytes >= 0x80, each taking one directly preceding space along with it;
// every other byte is its own piece.
std::vector<std::string_view> word_pieces(std::string_view text);

}  // namespace termforge

#endif  // TERMFORGE_TOKENIZER_H_
