// SPDX-License-Identifier: Apache-2.0
//
// teamprec: team MMSE precoding for cell-free massive MIMO
// Copyright (C) 2026 The teamprec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef TEAMPREC_PARALLEL_HPP
#define TEAMPREC_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace teamprec {

/// Threads used by parallel_for. Honors TEAMPREC_THREADS when set.
std::size_t worker_count();

/// Runs fn(i) for every i in [0, n). Work items are independent; callers
/// write results into per-item slots and reduce them in index order, so the
/// outcome does not depend on the thread count. The exception of the lowest
/// failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t threads = std::min(worker_count(), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 0; t + 1 < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Splits [0, total) into `count` contiguous batches of near-equal size.
struct BatchPlan {
  std::size_t total = 0;
  std::size_t count = 1;

  BatchPlan(std::size_t total_, std::size_t count_) : total(total_), count(std::max<std::size_t>(1, std::min(count_, total_))) {}

  std::size_t begin(std::size_t b) const { return b * total / count; }
  std::size_t end(std::size_t b) const { return (b + 1) * total / count; }
};

/// Default number of batches used for batch-means standard errors.
inline constexpr std::size_t kDefaultBatches = 20;

}  // namespace teamprec

#endif  // TEAMPREC_PARALLEL_HPP
