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

#ifndef TERMFORGE_PROMPTS_H_
#define TERMFORGE_PROMPTS_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "termforge/corpus.h"

namespace termforge {

// Generation prompts with named slots. The token-level template uses
// {background} and {term}; the sentence-level one {anchor} and {negative}.
struct PromptTemplates {
  std::string token_level;
  std::string sentence_level;

  static PromptTemplates defaults();
  // Reads token_level.txt and sentence_level.txt from `dir`.
  static PromptTemplates load(const std::filesystem::path& dir);
};

// Replaces every {name} with its value. Unknown or unfilled slots throw.
std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& slots);

std::string render_token_prompt(const SentenceRecord& anchor,
                                const EntityMention& term,
                                const PromptTemplates& templates =
                                    PromptTemplates::defaults());

std::string render_sentence_prompt(const SentenceRecord& anchor,
                                   const SentenceRecord& negative,
                                   const PromptTemplates& templates =
                                       PromptTemplates::defaults());

}  // namespace termforge

#endif  // TERMFORGE_PROMPTS_H_
