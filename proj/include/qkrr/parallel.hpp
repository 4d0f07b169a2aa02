// Copyright 2026 The qkrr Authors
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

#include <cstddef>
#include <functional>

namespace qkrr {

/// Upper bound on worker threads used by parallel_for. Defaults to the
/// hardware concurrency; 1 runs everything on the calling thread.
std::size_t max_workers();
void set_max_workers(std::size_t workers);

/// Calls fn(i) for i in [0, n), spreading indices over up to max_workers()
/// threads. fn must only write to per-index state. The first exception
/// thrown (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace qkrr
