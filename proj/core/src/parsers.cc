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

#include "termforge/parsers.h"

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "termforge/utf8.h"

namespace termforge {
namespace {

struct Field {
  std::string value;
  bool seen = false;
};

// Recognizes "<Name>:" at the start of a (left-trimmed) line. Returns the
// name and the offset just past the colon.
std::optional<std::pair<std::string, std::size_t>> tag_at(
    std::string_view line) {
  if (line.empty() || line[0] != '<') return std::nullopt;
  const std::size_t close = line.find('>');
  if (close == std::string_view::npos || close + 1 >= line.size() ||
      line[close + 1] != ':') {
    return std::nullopt;
  }
  std::string name(line.substr(1, close - 1));
  if (name.empty()) return std::nullopt;
  for (char c : name) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    (c >= '0' && c <= '9') || c == ' ' || c == '_';
    if (!ok) return std::nullopt;
  }
  return std::make_pair(std::move(name), close + 2);
}

std::vector<std::string_view> split_lines(std::string_view raw) {
  std::vector<std::string_view> lines;
  std::size_t begin = 0;
  while (begin <= raw.size()) {
    std::size_t end = raw.find('\n', begin);
    if (end == std::string_view::npos) end = raw.size();
    std::string_view line = raw.substr(begin, end - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    begin = end + 1;
  }
  return lines;
}

std::string_view ltrim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  return s;
}

// Splits `raw` into the expected tagged fields, in any order.
std::map<std::string, std::string> read_fields(
    std::string_view raw, std::span<const std::string_view> expected) {
  if (utf8::trim(raw).empty()) {
    throw ParseError(ParseErrorKind::kEmptyInput, "generation output is empty");
  }
  std::map<std::string, Field> fields;
  for (std::string_view name : expected) fields[std::string(name)];

  Field* current = nullptr;
  std::string current_name;
  for (std::string_view raw_line : split_lines(raw)) {
    const std::string_view line = ltrim(raw_line);
    if (auto tag = tag_at(line)) {
      auto it = fields.find(tag->first);
      if (it == fields.end()) {
        throw ParseError(ParseErrorKind::kUnknownTag,
                         "unknown tag <" + tag->first + ">");
      }
      if (it->second.seen) {
        throw ParseError(ParseErrorKind::kDuplicateTag,
                         "tag <" + tag->first + "> appears more than once");
      }
      it->second.seen = true;
      it->second.value = std::string(line.substr(tag->second));
      current = &it->second;
      current_name = tag->first;
      continue;
    }
    if (current == nullptr) {
      if (!utf8::trim(line).empty()) {
        throw ParseError(ParseErrorKind::kUnexpectedContent,
                         "text before the first tag: '" +
                             utf8::trim(line) + "'");
      }
      continue;
    }
    current->value += '\n';
    current->value += raw_line;
  }

  std::map<std::string, std::string> out;
  for (std::string_view name : expected) {
    Field& f = fields.at(std::string(name));
    if (!f.seen) {
      throw ParseError(ParseErrorKind::kMissingTag,
                       "missing tag <" + std::string(name) + ">");
    }
    std::string value = utf8::trim(f.value);
    if (value.empty()) {
      throw ParseError(ParseErrorKind::kEmptyField,
                       "tag <" + std::string(name) + "> has no content");
    }
    out.emplace(std::string(name), std::move(value));
  }
  return out;
}

constexpr std::string_view kTokenTags[] = {"Question", "Correct Answer",
                                           "Rephrased Sentence"};
constexpr std::string_view kSentenceTags[] = {
    "Question", "Choice A", "Choice B", "Choice C", "Choice D",
    "Correct Answer"};

}  // namespace

std::string_view parse_error_kind_name(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kEmptyInput: return "empty_input";
    case ParseErrorKind::kMissingTag: return "missing_tag";
    case ParseErrorKind::kDuplicateTag: return "duplicate_tag";
    case ParseErrorKind::kUnknownTag: return "unknown_tag";
    case ParseErrorKind::kUnexpectedContent: return "unexpected_content";
    case ParseErrorKind::kEmptyField: return "empty_field";
    case ParseErrorKind::kAnswerNotInRephrased: return "answer_not_in_rephrased";
    case ParseErrorKind::kAnswerMatchesNoChoice: return "answer_matches_no_choice";
    case ParseErrorKind::kDuplicateChoice: return "duplicate_choice";
  }
  return "unknown";
}

TokenOutput parse_token_output(std::string_view raw) {
  auto fields = read_fields(raw, kTokenTags);
  TokenOutput out{fields.at("Question"), fields.at("Correct Answer"),
                  fields.at("Rephrased Sentence")};
  if (out.rephrased.find(out.correct_answer) == std::string::npos) {
    throw ParseError(ParseErrorKind::kAnswerNotInRephrased,
                     "answer '" + out.correct_answer +
                         "' does not occur in the rephrased sentence");
  }
  return out;
}

std::array<std::string, 3> SentenceOutput::negatives() const {
  std::array<std::string, 3> out;
  std::size_t k = 0;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (i != correct_index) out[k++] = choices[i];
  }
  return out;
}

SentenceOutput parse_sentence_output(std::string_view raw) {
  auto fields = read_fields(raw, kSentenceTags);
  SentenceOutput out;
  out.question = fields.at("Question");
  out.correct = fields.at("Correct Answer");
  const char* letters[] = {"Choice A", "Choice B", "Choice C", "Choice D"};
  std::array<std::string, 4> normalized;
  for (std::size_t i = 0; i < 4; ++i) {
    out.choices[i] = fields.at(letters[i]);
    normalized[i] = utf8::normalize_whitespace(out.choices[i]);
    for (std::size_t j = 0; j < i; ++j) {
      if (normalized[j] == normalized[i]) {
        throw ParseError(ParseErrorKind::kDuplicateChoice,
                         std::string("<") + letters[j] + "> and <" +
                             letters[i] + "> are identical");
      }
    }
  }
  const std::string answer = utf8::normalize_whitespace(out.correct);
  std::optional<std::size_t> match;
  for (std::size_t i = 0; i < 4; ++i) {
    if (normalized[i] == answer) match = i;
  }
  if (!match) {
    throw ParseError(ParseErrorKind::kAnswerMatchesNoChoice,
                     "correct answer matches none of the choices");
  }
  out.correct_index = *match;
  out.answer_not_first = *match != 0;
  return out;
}

}  // namespace termforge
