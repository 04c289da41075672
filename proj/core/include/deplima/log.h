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

#ifndef DEPLIMA_LOG_H_
#define DEPLIMA_LOG_H_

#include <sstream>
#include <string>

namespace deplima {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3, kOff = 4 };

// Messages below this level are dropped. Defaults to kInfo; the
// DEPLIMA_LOG_LEVEL environment variable (debug/info/warning/error/off)
// overrides it at startup.
void SetLogLevel(LogLevel level);
LogLevel GetLogLevel();

// Writes one line to standard error. Thread-safe.
void LogMessage(LogLevel level, const std::string &message);

namespace internal {
class LogLine {
 public:
  explicit LogLine(LogLevel level) : level_(level) {}
  ~LogLine() { LogMessage(level_, stream_.str()); }
  template <typename T>
  LogLine &operator<<(const T &value) {
    stream_ << value;
    return *this;
  }

 private:
  LogLevel level_;
  std::ostringstream stream_;
};
}  // namespace internal

}  // namespace deplima

#define DEPLIMA_LOG(level)                                        \
  if (::deplima::LogLevel::level < ::deplima::GetLogLevel()) {    \
  } else                                                          \
    ::deplima::internal::LogLine(::deplima::LogLevel::level)

#endif  // DEPLIMA_LOG_H_
