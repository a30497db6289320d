// Copyright 2026 The logitsteer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LOGITSTEER_ERROR_HPP_
#define LOGITSTEER_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace logitsteer {

// Every failure raised by the library is an Error. Callers that only need to
// distinguish "bad input" from "bug" can catch this type alone.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed files and schema violations.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Missing or unwritable paths.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace logitsteer

#endif  // LOGITSTEER_ERROR_HPP_
