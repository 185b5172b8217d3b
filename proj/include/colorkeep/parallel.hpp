/*
 * Copyright 2026 The colorkeep Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace colorkeep {

/// Worker count for the per-pixel kernels. Results never depend on it.
struct Exec {
  unsigned threads = 1;
};

/// Number of pixels processed as one unit of work. Fixed so that the block
/// partition (and thus every reduction order) is independent of Exec.
inline constexpr std::size_t kBlockSize = 4096;

constexpr std::size_t block_count(std::size_t n) {
  return (n + kBlockSize - 1) / kBlockSize;
}

// Calls fn(block, begin, end) once for every block of [0, n). Blocks are
// striped over the workers; fn must only touch state owned by its block.
template <typename Fn>
void for_each_block(std::size_t n, Exec exec, Fn&& fn) {
  const std::size_t blocks = block_count(n);
  auto run_block = [&](std::size_t blk) {
    const std::size_t begin = blk * kBlockSize;
    fn(blk, begin, std::min(n, begin + kBlockSize));
  };
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, exec.threads), blocks);
  if (workers <= 1) {
    for (std::size_t blk = 0; blk < blocks; ++blk) run_block(blk);
    return;
  }

  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t blk = w; blk < blocks; blk += workers) run_block(blk);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Pairwise reduction over [first, last) with a split point that depends only
// on the length, so the summation tree is fixed for a given input size.
template <typename T, typename Op>
T tree_reduce(const std::vector<T>& parts, std::size_t first, std::size_t last,
              Op&& op) {
  if (last - first == 1) return parts[first];
  const std::size_t mid = first + (last - first) / 2;
  return op(tree_reduce(parts, first, mid, op), tree_reduce(parts, mid, last, op));
}

}  // namespace colorkeep
