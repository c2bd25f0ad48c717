#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace khess {

/// Number of workers used by grid maps. Defaults to 1.
void set_worker_count(int workers);
int worker_count() noexcept;

/// Grid work is cut into fixed blocks so that reductions combine partial
/// results in the same order whatever the worker count.
inline constexpr std::size_t kBlockSize = 4096;

/// Runs body(begin, end) once per block; each block has exactly one writer.
void parallel_blocks(std::size_t count,
                     const std::function<void(std::size_t, std::size_t)>& body);

/// Deterministic sum: partial(begin, end) per block, combined in block order.
double parallel_sum(std::size_t count,
                    const std::function<double(std::size_t, std::size_t)>& partial);

}  // namespace khess
