/**
 * Copyright 2026 The wbed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef WBED_PARALLEL_HPP_
#define WBED_PARALLEL_HPP_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "wbed/error.hpp"

namespace wbed {

inline int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

/// Runs fn(worker, index) for every index in [0, count), split into
/// contiguous chunks, one worker per chunk. Each worker walks its chunk in
/// ascending order, so if several items would fail, the exception that
/// escapes is always the one at the smallest failing index: the owning
/// worker reaches it before any later failure in its chunk, which makes
/// errors reproducible across jobs settings.
template <typename Fn>
inline void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  if (jobs < 1) {
    fail(ErrorCode::kInvalidArgument,
         "jobs must be at least 1, got " + std::to_string(jobs));
  }
  if (count == 0) return;
  const std::size_t workers =
      std::min(static_cast<std::size_t>(jobs), count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(0, i);
    return;
  }

  struct Failure {
    std::exception_ptr error;
    std::size_t index;
  };
  std::vector<std::optional<Failure>> failures(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t base = count / workers;
  const std::size_t rem = count % workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * base + std::min(w, rem);
    const std::size_t end = begin + base + (w < rem ? 1 : 0);
    threads.emplace_back([&fn, &failures, w, begin, end] {
      for (std::size_t i = begin; i < end; ++i) {
        try {
          fn(w, i);
        } catch (...) {
          failures[w] = Failure{std::current_exception(), i};
          return;
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();

  const Failure* first = nullptr;
  for (const std::optional<Failure>& f : failures) {
    if (f && (first == nullptr || f->index < first->index)) first = &*f;
  }
  if (first != nullptr) std::rethrow_exception(first->error);
}

}  // namespace wbed

#endif  // WBED_PARALLEL_HPP_
