// Copyright 2026 The rprct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RPRCT_STATUS_HPP_
#define RPRCT_STATUS_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace rprct {

// Error categories shared by the C++ core and the C API. The numeric values
// are part of the C ABI (see rprct.h) and must not be reordered.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDomain = 2,
  kInfeasible = 3,
  kUnidentified = 4,
  kDegenerate = 5,
  kSchema = 6,
  kIo = 7,
  kRankDeficient = 8,
  kInternal = 9,
};

std::string_view ErrorCodeName(ErrorCode code);

// True for failures caused by the data or the statistics rather than by the
// caller's input (these map to exit code 1 in the CLI, everything else to 2).
bool IsStatisticalFailure(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) Fail(code, message);
}

}  // namespace rprct

#endif  // RPRCT_STATUS_HPP_
