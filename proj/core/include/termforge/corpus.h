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

#ifndef TERMFORGE_CORPUS_H_
#define TERMFORGE_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace termforge {

enum class Split { kUnassigned, kTrain, kTest };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

// A term occurrence. Offsets are code points, half-open.
struct EntityMention {
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;
  std::optional<std::string> canonical_id;

  // Identity used for graph edges; falls back to the surface form when the
  // mention carries no canonical id.
  const std::string& key() const {
    return canonical_id ? *canonical_id : surface;
  }

  friend bool operator==(const EntityMention&, const EntityMention&) = default;
};

struct SentenceRecord {
  std::string id;
  std::string text;
  std::vector<EntityMention> entities;
  std::string category;
  Split split = Split::kUnassigned;

  friend bool operator==(const SentenceRecord&, const SentenceRecord&) = default;
};

// Surface form -> canonical id.
class TermLexicon {
 public:
  TermLexicon() = default;
  explicit TermLexicon(std::map<std::string, std::string> entries);

  void add(std::string surface, std::string canonical_id);
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::string> entries_;
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<SentenceRecord> records,
                  std::optional<TermLexicon> lexicon = std::nullopt);

  const std::vector<SentenceRecord>& records() const { return records_; }
  const std::optional<TermLexicon>& lexicon() const { return lexicon_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // Throws ValidationError for an unknown id.
  const SentenceRecord& at(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;
  bool contains(std::string_view id) const;

  bool is_split() const;
  std::size_t count(Split split) const;

 private:
  void validate() const;
  void build_index();

  std::vector<SentenceRecord> records_;
  std::optional<TermLexicon> lexicon_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// JSON-lines corpus and lexicon files.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::string_view jsonl, std::string_view source = "<memory>");
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::string serialize_corpus(const Corpus& corpus);
TermLexicon load_lexicon(const std::filesystem::path& path);

// Leftmost-longest, non-overlapping lexicon matching.
std::vector<EntityMention> extract_entities(std::string_view text,
                                            const TermLexicon& lexicon);

// Fills records whose entity lists are empty; annotated records are kept.
Corpus annotate_missing(const Corpus& corpus, const TermLexicon& lexicon);

// Seeded shuffle, then the first ceil(train_fraction * N) records become train.
Corpus split_corpus(const Corpus& corpus, double train_fraction,
                    std::uint64_t seed);

std::size_t train_count(std::size_t n, double train_fraction);

}  // namespace termforge

#endif  // TERMFORGE_CORPUS_H_
