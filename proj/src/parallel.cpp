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

#include "teamprec/parallel.hpp"

#include <cstdlib>
#include <string>

namespace teamprec {

std::size_t worker_count() {
  static const std::size_t count = [] {
    if (const char* env = std::getenv("TEAMPREC_THREADS")) {
      try {
        const long n = std::stol(env);
        if (n > 0) return static_cast<std::size_t>(n);
      } catch (...) {
      }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<std::size_t>(hw == 0 ? 1 : hw);
  }();
  return count;
}

}  // namespace teamprec
