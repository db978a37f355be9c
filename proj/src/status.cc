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

#include "rprct/status.hpp"

namespace rprct {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid_argument";
    case ErrorCode::kDomain:
      return "domain";
    case ErrorCode::kInfeasible:
      return "infeasible";
    case ErrorCode::kUnidentified:
      return "unidentified";
    case ErrorCode::kDegenerate:
      return "degenerate";
    case ErrorCode::kSchema:
      return "schema";
    case ErrorCode::kIo:
      return "io";
    case ErrorCode::kRankDeficient:
      return "rank_deficient";
    case ErrorCode::kInternal:
      return "internal";
  }
  return "unknown";
}

bool IsStatisticalFailure(ErrorCode code) {
  return code == ErrorCode::kUnidentified || code == ErrorCode::kDegenerate ||
         code == ErrorCode::kRankDeficient;
}

}  // namespace rprct
