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

#ifndef RPRCT_PARALLEL_HPP_
#define RPRCT_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace rprct {

// Number of worker threads for replicate/bootstrap loops. Reads RPRCT_WORKERS
// when set (values < 1 are ignored), otherwise hardware concurrency.
std::size_t DefaultWorkerCount();

// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
// executed exactly once; callers write results into slot i so the merge order
// is fixed. The first exception thrown by any body is rethrown after all
// workers finish.
void ParallelFor(std::size_t count, std::size_t workers,
                 const std::function<void(std::size_t)>& body);

}  // namespace rprct

#endif  // RPRCT_PARALLEL_HPP_
