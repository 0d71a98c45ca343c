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

#ifndef TERMFORGE_TESTS_SUPPORT_FAKE_SERVER_H_
#define TERMFORGE_TESTS_SUPPORT_FAKE_SERVER_H_

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

namespace termforge::testing {

struct FakeResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Loopback HTTP server answering POSTs on any path. The handler sees the
// request body and the 0-based request number.
class FakeServer {
 public:
  using Handler = std::function<FakeResponse(const std::string& body, int n)>;

  explicit FakeServer(Handler handler);
  ~FakeServer();
  FakeServer(const FakeServer&) = delete;
  FakeServer& operator=(const FakeServer&) = delete;

  std::string url(const std::string& path = "/v1/endpoint") const;
  int requests() const { return count_.load(); }
  std::string last_authorization() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<int> count_{0};
};

}  // namespace termforge::testing

#endif  // TERMFORGE_TESTS_SUPPORT_FAKE_SERVER_H_
