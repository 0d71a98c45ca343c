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

#include "termforge/prompts.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "termforge/errors.h"

namespace termforge {
namespace {

constexpr const char* kDefaultTokenTemplate = R"(Write one question whose answer is the term {term}, using the background sentence below as context.

Rules:
- Ask about {term} specifically and phrase the question in your own words rather than reusing the background sentence.
- The answer is exactly {term}.
- Then restate the question and its answer as one declarative sentence. It must contain {term} verbatim and add nothing beyond the question.
- Avoid openings like "Which of the following".
- Output only the three tagged lines below.

Background:
{background}

Term:
{term}

Output:
<Question>: ...
<Correct Answer>: {term}
<Rephrased Sentence>: ...
)";

constexpr const char* kDefaultSentenceTemplate = R"(Write one multiple-choice question with four full-sentence options, built from the two sentences below.

Rules:
- Option A is correct and comes from the anchor sentence.
- Option B is wrong and comes from the negative sentence.
- Options C and D are wrong options you write yourself, close to A and borrowing details from the negative sentence.
- Give the correct answer as the full sentence, not as a letter.
- Avoid openings like "Which of the following" and boilerplate such as "According to the regulations".
- Output only the six tagged lines below.

Anchor:
{anchor}

Negative:
{negative}

Output:
<Question>: ...
<Choice A>: ...
<Choice B>: ...
<Choice C>: ...
<Choice D>: ...
<Correct Answer>: ...
)";

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open prompt template " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool is_slot_char(char c) {
  return (c >= 'a' && c <= 'z') || c == '_';
}

}  // namespace

PromptTemplates PromptTemplates::defaults() {
  return PromptTemplates{kDefaultTokenTemplate, kDefaultSentenceTemplate};
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  return PromptTemplates{read_text(dir / "token_level.txt"),
                         read_text(dir / "sentence_level.txt")};
}

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t j = i + 1;
      while (j < tmpl.size() && is_slot_char(tmpl[j])) ++j;
      if (j < tmpl.size() && tmpl[j] == '}' && j > i + 1) {
        const std::string name(tmpl.substr(i + 1, j - i - 1));
        auto it = slots.find(name);
        if (it == slots.end()) {
          throw ValidationError("template slot {" + name + "} has no value");
        }
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out.push_back(tmpl[i]);
    ++i;
  }
  return out;
}

std::string render_token_prompt(const SentenceRecord& anchor,
                                const EntityMention& term,
                                const PromptTemplates& templates) {
  const bool belongs = std::any_of(
      anchor.entities.begin(), anchor.entities.end(),
      [&](const EntityMention& m) { return m == term; });
  if (!belongs) {
    throw ValidationError("term '" + term.surface +
                          "' is not a mention of sentence '" + anchor.id + "'");
  }
  return render_template(templates.token_level,
                         {{"background", anchor.text}, {"term", term.surface}});
}

std::string render_sentence_prompt(const SentenceRecord& anchor,
                                   const SentenceRecord& negative,
                                   const PromptTemplates& templates) {
  return render_template(templates.sentence_level,
                         {{"anchor", anchor.text}, {"negative", negative.text}});
}

}  // namespace termforge
