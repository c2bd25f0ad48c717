#include "khess/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "khess/error.hpp"

namespace khess {
namespace {
std::atomic<int> g_workers{1};
}

void set_worker_count(int workers) {
  if (workers < 1) throw Error(Errc::InvalidArgument, "worker count must be >= 1");
  g_workers.store(workers);
}

int worker_count() noexcept { return g_workers.load(); }

void parallel_blocks(std::size_t count,
                     const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t blocks = (count + kBlockSize - 1) / kBlockSize;
  const auto workers = static_cast<std::size_t>(
      std::min<std::size_t>(static_cast<std::size_t>(worker_count()), blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) {
      body(b * kBlockSize, std::min(count, (b + 1) * kBlockSize));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t b = next++; b < blocks; b = next++) {
      body(b * kBlockSize, std::min(count, (b + 1) * kBlockSize));
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
}

double parallel_sum(std::size_t count,
                    const std::function<double(std::size_t, std::size_t)>& partial) {
  const std::size_t blocks = (count + kBlockSize - 1) / kBlockSize;
  std::vector<double> parts(blocks, 0.0);
  parallel_blocks(count, [&](std::size_t begin, std::size_t end) {
    parts[begin / kBlockSize] = partial(begin, end);
  });
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

}  // namespace khess
