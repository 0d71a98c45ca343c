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

#ifndef TERMFORGE_UTF8_H_
#define TERMFORGE_UTF8_H_

#include <cstddef>
#include <string>
#include <string_view>

namespace termforge::utf8 {

// Strict decoder; throws ValidationError on malformed input.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view code_points);

// Lossy decode: every invalid byte becomes U+FFFD.
std::string sanitize(std::string_view text);

std::size_t length(std::string_view text);

// Slices by code point offsets [start, end).
std::string substr(std::string_view text, std::size_t start, std::size_t end);

// Collapses whitespace runs to one ASCII space and trims both ends.
std::string normalize_whitespace(std::string_view text);
std::string trim(std::string_view text);

// NFKC normalization backed by ICU.
std::string nfkc(std::string_view text);

}  // namespace termforge::utf8

#endif  // TERMFORGE_UTF8_H_
