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

#include "termforge/http.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "termforge/errors.h"

namespace termforge {

std::optional<std::string> api_key_from_env() {
  if (const char* v = std::getenv(kApiKeyEnv); v != nullptr && *v != '\0') {
    return std::string(v);
  }
  return std::nullopt;
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry) {
  const double raw = static_cast<double>(policy.initial_delay.count()) *
                     std::pow(policy.backoff_factor, retry);
  const double capped =
      std::min(raw, static_cast<double>(policy.max_delay.count()));
  return std::chrono::milliseconds(static_cast<long long>(capped));
}

bool is_retryable_status(int status) {
  return status == 408 || status == 429 || (status >= 500 && status <= 599);
}

Url parse_url(std::string_view url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw ValidationError("URL lacks a scheme: " + std::string(url));
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ValidationError("unsupported URL scheme: " + std::string(scheme));
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  Url out;
  if (path_start == std::string_view::npos) {
    out.scheme_host_port = std::string(url);
    out.path = "/";
  } else {
    out.scheme_host_port = std::string(url.substr(0, path_start));
    out.path = std::string(url.substr(path_start));
  }
  if (out.scheme_host_port.size() <= scheme_end + 3) {
    throw ValidationError("URL lacks a host: " + std::string(url));
  }
  return out;
}

JsonHttpClient::JsonHttpClient(std::string url, RetryPolicy policy,
                               std::optional<std::string> api_key,
                               int max_in_flight)
    : url_(parse_url(url)),
      policy_(policy),
      api_key_(std::move(api_key)),
      in_flight_(std::make_unique<std::counting_semaphore<>>(
          std::max(1, max_in_flight))),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

JsonHttpClient::~JsonHttpClient() = default;

nlohmann::json JsonHttpClient::post(const nlohmann::json& body) const {
  in_flight_->acquire();
  struct Release {
    std::counting_semaphore<>* s;
    ~Release() { s->release(); }
  } release{in_flight_.get()};

  httplib::Client client(url_.scheme_host_port);
  const auto timeout = policy_.request_timeout;
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
  httplib::Headers headers;
  if (api_key_) headers.emplace("Authorization", "Bearer " + *api_key_);
  const std::string payload = body.dump();

  std::string last_error;
  int made = 0;
  for (int attempt = 0; attempt <= policy_.max_retries; ++attempt) {
    if (attempt > 0) sleeper_(backoff_delay(policy_, attempt - 1));
    ++made;
    attempts_.fetch_add(1);
    auto res = client.Post(url_.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw RemoteError("response is not JSON: " + std::string(e.what()));
      }
    }
    last_error = "HTTP " + std::to_string(res->status);
    if (!is_retryable_status(res->status)) break;
  }
  throw RemoteError("request to " + url_.scheme_host_port + url_.path +
                    " failed after " + std::to_string(made) +
                    " attempt(s): " + last_error);
}

}  // namespace termforge
