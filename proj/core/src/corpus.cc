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

#include "termforge/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "termforge/errors.h"
#include "termforge/random.h"
#include "termforge/utf8.h"

namespace termforge {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) {
    return c == ' ' || c == '\t';
  });
}

const json& require(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(std::string(where) + ": missing field '" + key + "'");
  }
  return *it;
}

std::string require_string(const json& obj, const char* key,
                           std::string_view where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) {
    throw ValidationError(std::string(where) + ": field '" + key +
                          "' must be a string");
  }
  return v.get<std::string>();
}

std::size_t require_offset(const json& obj, const char* key,
                           std::string_view where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_unsigned()) {
    throw ValidationError(std::string(where) + ": field '" + key +
                          "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

SentenceRecord parse_record(const json& obj, std::string_view where) {
  if (!obj.is_object()) {
    throw ValidationError(std::string(where) + ": expected a JSON object");
  }
  SentenceRecord record;
  record.id = require_string(obj, "id", where);
  record.text = require_string(obj, "text", where);
  record.category = require_string(obj, "category", where);
  const json& entities = require(obj, "entities", where);
  if (!entities.is_array()) {
    throw ValidationError(std::string(where) + ": 'entities' must be an array");
  }
  for (const json& e : entities) {
    if (!e.is_object()) {
      throw ValidationError(std::string(where) + ": entity must be an object");
    }
    EntityMention mention;
    mention.surface = require_string(e, "surface", where);
    mention.start = require_offset(e, "start", where);
    mention.end = require_offset(e, "end", where);
    if (auto it = e.find("canonical_id"); it != e.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw ValidationError(std::string(where) +
                              ": 'canonical_id' must be a string");
      }
      mention.canonical_id = it->get<std::string>();
    }
    record.entities.push_back(std::move(mention));
  }
  if (auto it = obj.find("split"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw ValidationError(std::string(where) + ": 'split' must be a string");
    }
    record.split = parse_split(it->get<std::string>());
  }
  return record;
}

void validate_record(const SentenceRecord& record) {
  const std::string where = "record '" + record.id + "'";
  if (record.id.empty()) throw ValidationError("record with empty id");
  if (utf8::trim(record.text).empty()) {
    throw ValidationError(where + ": text is empty");
  }
  const std::u32string text = utf8::decode(record.text);
  std::size_t previous_end = 0;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const EntityMention& m : record.entities) {
    if (!(m.start < m.end && m.end <= text.size())) {
      throw ValidationError(where + ": entity '" + m.surface +
                            "' has span out of range");
    }
    if (utf8::encode(std::u32string_view(text).substr(
            m.start, m.end - m.start)) != m.surface) {
      throw ValidationError(where + ": entity span [" +
                            std::to_string(m.start) + "," +
                            std::to_string(m.end) +
                            ") does not match surface '" + m.surface + "'");
    }
    spans.emplace_back(m.start, m.end);
  }
  std::sort(spans.begin(), spans.end());
  for (const auto& [start, end] : spans) {
    if (start < previous_end) {
      throw ValidationError(where + ": overlapping entity mentions");
    }
    previous_end = end;
  }
}

ordered_json record_to_json(const SentenceRecord& record) {
  ordered_json obj;
  obj["id"] = record.id;
  obj["text"] = record.text;
  obj["category"] = record.category;
  ordered_json entities = ordered_json::array();
  for (const EntityMention& m : record.entities) {
    ordered_json e;
    e["surface"] = m.surface;
    e["start"] = m.start;
    e["end"] = m.end;
    if (m.canonical_id) e["canonical_id"] = *m.canonical_id;
    entities.push_back(std::move(e));
  }
  obj["entities"] = std::move(entities);
  if (record.split != Split::kUnassigned) {
    obj["split"] = std::string(split_name(record.split));
  }
  return obj;
}

}  // namespace

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kTest:
      return "test";
    case Split::kUnassigned:
      break;
  }
  return "unassigned";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  if (name == "unassigned") return Split::kUnassigned;
  throw ValidationError("unknown split '" + std::string(name) + "'");
}

TermLexicon::TermLexicon(std::map<std::string, std::string> entries) {
  for (auto& [surface, id] : entries) add(surface, id);
}

void TermLexicon::add(std::string surface, std::string canonical_id) {
  if (surface.empty()) throw ValidationError("lexicon surface is empty");
  auto [it, inserted] = entries_.emplace(std::move(surface), canonical_id);
  if (!inserted) {
    throw ValidationError("duplicate lexicon surface '" + it->first + "'");
  }
}

Corpus::Corpus(std::vector<SentenceRecord> records,
               std::optional<TermLexicon> lexicon)
    : records_(std::move(records)), lexicon_(std::move(lexicon)) {
  validate();
  build_index();
}

void Corpus::validate() const {
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const SentenceRecord& r = records_[i];
    validate_record(r);
    if (!seen.emplace(r.id, i).second) {
      throw ValidationError("duplicate record id '" + r.id + "'");
    }
    if (r.split != Split::kUnassigned) ++assigned;
  }
  if (assigned != 0 && assigned != records_.size()) {
    throw ValidationError(
        "inconsistent split assignment: some records are unassigned");
  }
}

void Corpus::build_index() {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    index_.emplace(records_[i].id, i);
  }
}

const SentenceRecord& Corpus::at(std::string_view id) const {
  return records_[index_of(id)];
}

std::size_t Corpus::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw ValidationError("unknown sentence id '" + std::string(id) + "'");
  }
  return it->second;
}

bool Corpus::contains(std::string_view id) const {
  return index_.find(id) != index_.end();
}

bool Corpus::is_split() const {
  return !records_.empty() && records_.front().split != Split::kUnassigned;
}

std::size_t Corpus::count(Split split) const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(),
                    [split](const SentenceRecord& r) { return r.split == split; }));
}

Corpus parse_corpus(std::string_view jsonl, std::string_view source) {
  std::vector<SentenceRecord> records;
  const auto lines = split_lines(jsonl);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const std::string where =
        std::string(source) + ":" + std::to_string(i + 1);
    json obj;
    try {
      obj = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw ValidationError(where + ": malformed JSON: " + e.what());
    }
    records.push_back(parse_record(obj, where));
  }
  return Corpus(std::move(records));
}

Corpus load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path), path.string());
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const SentenceRecord& r : corpus.records()) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_corpus(corpus);
  if (!out) throw IoError("write failed for " + path.string());
}

TermLexicon load_lexicon(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  TermLexicon lexicon;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    json obj;
    try {
      obj = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw ValidationError(where + ": malformed JSON: " + e.what());
    }
    lexicon.add(require_string(obj, "surface", where),
                require_string(obj, "canonical_id", where));
  }
  return lexicon;
}

std::vector<EntityMention> extract_entities(std::string_view text,
                                            const TermLexicon& lexicon) {
  struct Entry {
    std::u32string surface;
    const std::string* raw;
    const std::string* id;
  };
  // Bucketed by first code point, longest first.
  std::unordered_map<char32_t, std::vector<Entry>> by_first;
  for (const auto& [surface, id] : lexicon.entries()) {
    std::u32string cps = utf8::decode(surface);
    by_first[cps.front()].push_back({std::move(cps), &surface, &id});
  }
  for (auto& [first, entries] : by_first) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) {
                       return a.surface.size() > b.surface.size();
                     });
  }

  const std::u32string cps = utf8::decode(text);
  std::vector<EntityMention> mentions;
  std::size_t pos = 0;
  while (pos < cps.size()) {
    const Entry* match = nullptr;
    if (auto it = by_first.find(cps[pos]); it != by_first.end()) {
      for (const Entry& e : it->second) {
        if (std::u32string_view(cps).substr(pos, e.surface.size()) ==
            e.surface) {
          match = &e;
          break;
        }
      }
    }
    if (match == nullptr) {
      ++pos;
      continue;
    }
    mentions.push_back(EntityMention{*match->raw, pos,
                                     pos + match->surface.size(), *match->id});
    pos += match->surface.size();
  }
  return mentions;
}

Corpus annotate_missing(const Corpus& corpus, const TermLexicon& lexicon) {
  std::vector<SentenceRecord> records = corpus.records();
  if (!lexicon.empty()) {
    for (SentenceRecord& r : records) {
      if (r.entities.empty()) r.entities = extract_entities(r.text, lexicon);
    }
  }
  return Corpus(std::move(records), lexicon);
}

std::size_t train_count(std::size_t n, double train_fraction) {
  // Guard against 0.7 * 10 = 7.000000000000001 rounding up to 8.
  const double raw = train_fraction * static_cast<double>(n);
  const double rounded = std::round(raw);
  if (std::abs(raw - rounded) < 1e-9) return static_cast<std::size_t>(rounded);
  return static_cast<std::size_t>(std::ceil(raw));
}

Corpus split_corpus(const Corpus& corpus, double train_fraction,
                    std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train fraction must lie in (0, 1)");
  }
  for (const SentenceRecord& r : corpus.records()) {
    if (r.split != Split::kUnassigned) {
      throw ValidationError("corpus is already split (record '" + r.id + "')");
    }
  }
  std::vector<SentenceRecord> records = corpus.records();
  const std::vector<std::size_t> order = shuffled_indices(records.size(), seed);
  const std::size_t n_train = train_count(records.size(), train_fraction);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    records[order[rank]].split = rank < n_train ? Split::kTrain : Split::kTest;
  }
  return Corpus(std::move(records), corpus.lexicon());
}

}  // namespace termforge
