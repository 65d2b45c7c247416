// Copyright 2026 The PrivBandit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVBANDIT_PARALLEL_H_
#define PRIVBANDIT_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace privbandit {

// Worker count from PRIVBANDIT_THREADS; falls back to the hardware
// concurrency. Always >= 1.
int WorkerCountFromEnv();

// Runs fn(0) .. fn(n - 1) on up to `workers` threads. Callers write results
// into index-addressed slots, so output order never depends on scheduling.
// The first exception thrown by fn is rethrown after all workers join.
void ParallelFor(std::size_t n, int workers,
                 const std::function<void(std::size_t)>& fn);

}  // namespace privbandit

#endif  // PRIVBANDIT_PARALLEL_H_
