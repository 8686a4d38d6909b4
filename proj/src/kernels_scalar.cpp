#include <numeric>

#include "gcdlab/kernels.hpp"

namespace gcdlab::kernels::scalar {

void gcd_batch(std::uint32_t a, std::span<const std::uint32_t> b, std::span<std::uint32_t> out) {
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = std::gcd(a, b[i]);
}

std::uint64_t count_gcd_at_least(std::uint32_t a, std::span<const std::uint32_t> b, std::uint32_t threshold) {
  std::uint64_t count = 0;
  for (std::uint32_t v : b) count += std::gcd(a, v) >= threshold ? 1 : 0;
  return count;
}

}  // namespace gcdlab::kernels::scalar
