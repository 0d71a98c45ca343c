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

#ifndef TERMFORGE_HTTP_H_
#define TERMFORGE_HTTP_H_

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace termforge {

inline constexpr const char* kApiKeyEnv = "TERMFORGE_API_KEY";

std::optional<std::string> api_key_from_env();

struct RetryPolicy {
  int max_retries = 3;  // attempts after the first
  std::chrono::milliseconds initial_delay{250};
  double backoff_factor = 2.0;
  std::chrono::milliseconds max_delay{8000};
  std::chrono::milliseconds request_timeout{60000};
};

// Delay before retry number `retry` (0-based), capped at max_delay.
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry);

// 429, 408 and 5xx are retried; other 4xx fail immediately.
bool is_retryable_status(int status);

struct Url {
  std::string scheme_host_port;  // e.g. "http://127.0.0.1:8080"
  std::string path;              // e.g. "/v1/embeddings"
};

Url parse_url(std::string_view url);

// POSTs JSON bodies with exponential backoff. At most `max_in_flight`
// requests run concurrently through one client. Throws RemoteError once the
// retry budget is exhausted or the response is not JSON.
class JsonHttpClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  JsonHttpClient(std::string url, RetryPolicy policy,
                 std::optional<std::string> api_key, int max_in_flight = 4);
  ~JsonHttpClient();

  JsonHttpClient(const JsonHttpClient&) = delete;
  JsonHttpClient& operator=(const JsonHttpClient&) = delete;

  nlohmann::json post(const nlohmann::json& body) const;

  // Tests replace the sleeper to avoid real waits.
  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }
  int attempts_made() const { return attempts_.load(); }

 private:
  Url url_;
  RetryPolicy policy_;
  std::optional<std::string> api_key_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
  Sleeper sleeper_;
  mutable std::atomic<int> attempts_{0};
};

}  // namespace termforge

#endif  // TERMFORGE_HTTP_H_
