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

#ifndef TERMFORGE_GENERATION_H_
#define TERMFORGE_GENERATION_H_

#include <optional>
#include <string>

#include "termforge/http.h"

namespace termforge {

// Text-in, text-out completion backend used by the augmentation stage.
class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  // Throws RemoteError on transport failure after retries.
  virtual std::string complete(const std::string& prompt) const = 0;
};

struct ChatCompletionOptions {
  std::string endpoint;
  std::string model = "qwen-plus";
  double temperature = 0.0;
  RetryPolicy retry;
  int max_in_flight = 4;
};

// POST {"model", "messages": [{"role": "user", "content"}], "temperature"}
// and return choices[0].message.content.
class ChatCompletionClient final : public TextGenerator {
 public:
  explicit ChatCompletionClient(
      ChatCompletionOptions options,
      std::optional<std::string> api_key = api_key_from_env());

  std::string complete(const std::string& prompt) const override;

  const ChatCompletionOptions& options() const { return options_; }
  JsonHttpClient& http() { return client_; }

 private:
  ChatCompletionOptions options_;
  JsonHttpClient client_;
};

}  // namespace termforge

#endif  // TERMFORGE_GENERATION_H_
