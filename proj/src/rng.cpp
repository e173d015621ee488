#include "ccr/rng.hpp"

#include <numeric>
#include <string>

#include "ccr/hash.hpp"

namespace ccr {

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) k = n;
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

std::uint64_t sub_seed(std::uint64_t master, std::string_view module, std::uint64_t period,
                       std::string_view candidate) {
  std::string key = std::to_string(master);
  key += '|';
  key += module;
  key += '|';
  key += std::to_string(period);
  key += '|';
  key += candidate;
  return sha256_prefix64(key);
}

}  // namespace ccr
