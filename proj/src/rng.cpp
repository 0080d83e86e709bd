#include "asgd/rng.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace asgd {

std::vector<std::uint32_t> pick_distinct(std::size_t n, std::size_t count, RandomStream& rng) {
  if (count > n) throw std::invalid_argument("pick_distinct: count exceeds population");
  std::vector<std::uint32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0u);
  // Partial Fisher-Yates: after `count` swaps the prefix is a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace asgd
