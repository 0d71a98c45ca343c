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

#include "termforge/generation.h"

#include "termforge/errors.h"

namespace termforge {

ChatCompletionClient::ChatCompletionClient(ChatCompletionOptions options,
                                           std::optional<std::string> api_key)
    : options_(std::move(options)),
      client_(options_.endpoint, options_.retry, std::move(api_key),
              options_.max_in_flight) {}

std::string ChatCompletionClient::complete(const std::string& prompt) const {
  nlohmann::json body = {
      {"model", options_.model},
      {"messages", nlohmann::json::array(
                       {{{"role", "user"}, {"content", prompt}}})},
      {"temperature", options_.temperature},
  };
  const nlohmann::json reply = client_.post(body);
  try {
    const auto& content = reply.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) {
      throw RemoteError("chat completion content is not a string");
    }
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw RemoteError(std::string("malformed chat completion reply: ") +
                      e.what());
  }
}

}  // namespace termforge
