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

#include "deplima/log.h"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string_view>

namespace deplima {
namespace {

LogLevel InitialLevel() {
  const char *env = std::getenv("DEPLIMA_LOG_LEVEL");
  if (env == nullptr) return LogLevel::kInfo;
  const std::string_view v(env);
  if (v == "debug") return LogLevel::kDebug;
  if (v == "warning") return LogLevel::kWarning;
  if (v == "error") return LogLevel::kError;
  if (v == "off") return LogLevel::kOff;
  return LogLevel::kInfo;
}

std::atomic<LogLevel> &Level() {
  static std::atomic<LogLevel> level{InitialLevel()};
  return level;
}

const char *Tag(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug:
      return "D";
    case LogLevel::kInfo:
      return "I";
    case LogLevel::kWarning:
      return "W";
    case LogLevel::kError:
      return "E";
    default:
      return "?";
  }
}

}  // namespace

void SetLogLevel(LogLevel level) { Level().store(level); }

LogLevel GetLogLevel() { return Level().load(); }

void LogMessage(LogLevel level, const std::string &message) {
  if (level < GetLogLevel()) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << Tag(level) << " deplima: " << message << '\n';
}

}  // namespace deplima
