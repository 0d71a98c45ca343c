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

#include "workspace.h"

#include <fcntl.h>
#include <unistd.h>

#include <array>
#include <ctime>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "termforge/errors.h"

namespace termforge::tools {
namespace {

using ordered_json = nlohmann::ordered_json;

// Workspace files by relative name; outside inputs by absolute path.
std::string relative_name(const Workspace& ws, const std::filesystem::path& p) {
  const std::filesystem::path abs = std::filesystem::absolute(p).lexically_normal();
  const std::filesystem::path root =
      std::filesystem::absolute(ws.root).lexically_normal();
  const std::filesystem::path rel = abs.lexically_relative(root);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return abs.generic_string();
}

ordered_json file_entries(const Workspace& ws,
                          const std::vector<std::filesystem::path>& files) {
  ordered_json out = ordered_json::array();
  for (const auto& f : files) {
    out.push_back({{"path", relative_name(ws, f)}, {"sha256", sha256_file(f)}});
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw IoError("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_file(path));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename onto " + path.string() + ": " + ec.message());
}

DirectoryLock::DirectoryLock(const std::filesystem::path& dir)
    : path_(dir / ".termforge.lock") {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw IoError(dir.string() + " is locked by another run (remove " +
                  path_.string() + " if it is stale)");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const ssize_t n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const Workspace& ws, const StepRecord& record, bool complete) {
  ordered_json j;
  j["step"] = record.step;
  j["status"] = complete ? "complete" : "running";
  j["tool_version"] = TERMFORGE_VERSION;
  j["seed"] = record.seed;
  j["recorded_at"] = utc_timestamp();
  if (record.parent.empty()) {
    j["parent"] = nullptr;
  } else {
    j["parent"] = {{"step", record.parent},
                   {"sha256", sha256_file(ws.manifest(record.parent))}};
  }
  j["config_sha256"] = sha256_hex(record.config.dump());
  j["inputs"] = file_entries(ws, record.inputs);
  if (complete) {
    j["outputs"] = file_entries(ws, record.outputs);
  } else {
    ordered_json planned = ordered_json::array();
    for (const auto& f : record.outputs) planned.push_back(relative_name(ws, f));
    j["outputs_planned"] = planned;
  }
  j["config"] = record.config;
  write_file(ws.manifest(record.step), j.dump(2) + "\n");
}

void verify_inputs(const Workspace& ws, std::string_view parent,
                   const std::vector<std::filesystem::path>& inputs) {
  const std::filesystem::path mpath = ws.manifest(parent);
  if (!std::filesystem::exists(mpath)) {
    throw ValidationError("missing " + mpath.string() + "; run '" +
                          std::string(parent) + "' first");
  }
  const auto manifest = nlohmann::json::parse(read_file(mpath));
  if (manifest.value("status", "") != "complete") {
    throw ValidationError("step '" + std::string(parent) + "' did not complete");
  }
  for (const auto& in : inputs) {
    if (!std::filesystem::exists(in)) {
      throw IoError("missing input " + in.string());
    }
    const std::string name = relative_name(ws, in);
    const std::string actual = sha256_file(in);
    bool found = false;
    for (const auto& out : manifest.at("outputs")) {
      if (out.at("path") == name) {
        found = true;
        if (out.at("sha256") != actual) {
          throw ValidationError(name + " changed since '" + std::string(parent) +
                                "' wrote it; rerun that step");
        }
      }
    }
    if (!found) {
      throw ValidationError(name + " is not an output of '" +
                            std::string(parent) + "'");
    }
  }
}

}  // namespace termforge::tools
