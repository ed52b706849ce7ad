// Copyright 2026 The dgsf Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace dgsf {

// Malformed or inconsistent user input (bad shapes, bad files, bad flags).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A library invariant did not hold. Indicates a bug, not bad input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

#define DGSF_REQUIRE(cond, msg)                    \
  do {                                             \
    if (!(cond)) throw ::dgsf::InputError(msg);    \
  } while (0)

#define DGSF_ASSERT(cond, msg)                     \
  do {                                             \
    if (!(cond)) throw ::dgsf::InvariantError(msg); \
  } while (0)

}  // namespace dgsf
