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

#ifndef DEPLIMA_ERROR_H_
#define DEPLIMA_ERROR_H_

#include <stdexcept>
#include <string>

namespace deplima {

// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An error tagged with a module-specific kind so callers (and tests) can
// dispatch on the failure without parsing messages.
template <typename Kind>
class KindedError : public Error {
 public:
  KindedError(Kind kind, const std::string &message)
      : Error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace deplima

#endif  // DEPLIMA_ERROR_H_
