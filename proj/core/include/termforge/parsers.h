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

#ifndef TERMFORGE_PARSERS_H_
#define TERMFORGE_PARSERS_H_

#include <array>
#include <string>
#include <string_view>

#include "termforge/errors.h"

namespace termforge {

enum class ParseErrorKind {
  kEmptyInput,
  kMissingTag,
  kDuplicateTag,
  kUnknownTag,
  kUnexpectedContent,
  kEmptyField,
  kAnswerNotInRephrased,
  kAnswerMatchesNoChoice,
  kDuplicateChoice,
};

std::string_view parse_error_kind_name(ParseErrorKind kind);

class ParseError : public ValidationError {
 public:
  ParseError(ParseErrorKind kind, const std::string& message)
      : ValidationError(message), kind_(kind) {}
  ParseErrorKind kind() const { return kind_; }

 private:
  ParseErrorKind kind_;
};

struct TokenOutput {
  std::string question;
  std::string correct_answer;
  std::string rephrased;
};

// Reads the <Question>, <Correct Answer> and <Rephrased Sentence> fields.
// Values may span lines up to the next tag; surrounding whitespace and blank
// lines are ignored. The answer must occur verbatim in the rephrased text.
TokenOutput parse_token_output(std::string_view raw);

struct SentenceOutput {
  std::string question;
  std::array<std::string, 4> choices;  // A..D
  std::string correct;
  std::size_t correct_index = 0;
  // The generator is asked to put the answer in choice A.
  bool answer_not_first = false;

  // The three choices other than the correct one, in A..D order.
  std::array<std::string, 3> negatives() const;
};

SentenceOutput parse_sentence_output(std::string_view raw);

}  // namespace termforge

#endif  // TERMFORGE_PARSERS_H_
