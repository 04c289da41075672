// Copyright 2026 The deplima Authors.
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

#ifndef DEPLIMA_UTF8_H_
#define DEPLIMA_UTF8_H_

#include <string>
#include <string_view>
#include <vector>

namespace deplima::utf8 {

// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD, one per
// offending byte, so offsets stay well defined on malformed input.
std::u32string Decode(std::string_view text);

std::string Encode(char32_t cp);
std::string Encode(std::u32string_view cps);

bool IsSpace(char32_t cp);
bool IsUpper(char32_t cp);
char32_t ToLower(char32_t cp);
char32_t ToUpper(char32_t cp);

// Escapes control characters, tabs, newlines and backslashes so that an
// arbitrary string fits on one field of a tab-separated line.
std::string EscapeField(std::string_view s);
std::string UnescapeField(std::string_view s);

std::vector<std::string> Split(std::string_view s, char sep);
std::string_view Trim(std::string_view s);

}  // namespace deplima::utf8

#endif  // DEPLIMA_UTF8_H_
