// Compiled with -mavx2. Nothing in here may run before avx2::available()
// has returned true.

#include <immintrin.h>

#include <algorithm>
#include <bit>
#include <numeric>

#include "gcdlab/kernels.hpp"

namespace gcdlab::kernels::avx2 {

namespace {

// Trailing-zero count per lane via the float exponent of the isolated low
// bit. Zero lanes yield 0xFFFFFF81, which variable shifts treat as >= 32.
inline __m256i ctz_epi32(__m256i v) {
  const __m256i lsb = _mm256_and_si256(v, _mm256_sub_epi32(_mm256_setzero_si256(), v));
  const __m256i bits = _mm256_castps_si256(_mm256_cvtepi32_ps(lsb));
  const __m256i exponent = _mm256_and_si256(_mm256_srli_epi32(bits, 23), _mm256_set1_epi32(0xFF));
  return _mm256_sub_epi32(exponent, _mm256_set1_epi32(127));
}

// Binary gcd of the scalar a (a != 0) against eight lanes.
inline __m256i gcd_lanes(std::uint32_t a, __m256i y) {
  const std::uint32_t shift_a = static_cast<std::uint32_t>(std::countr_zero(a));
  const __m256i shift = _mm256_min_epu32(ctz_epi32(y), _mm256_set1_epi32(static_cast<int>(shift_a)));
  __m256i x = _mm256_set1_epi32(static_cast<int>(a >> shift_a));
  const __m256i zero = _mm256_setzero_si256();
  for (;;) {
    const __m256i done = _mm256_cmpeq_epi32(y, zero);
    if (_mm256_movemask_epi8(done) == -1) break;
    y = _mm256_srlv_epi32(y, ctz_epi32(y));
    const __m256i lo = _mm256_min_epu32(x, y);
    const __m256i hi = _mm256_max_epu32(x, y);
    x = _mm256_blendv_epi8(lo, x, done);
    y = _mm256_blendv_epi8(_mm256_sub_epi32(hi, lo), zero, done);
  }
  return _mm256_sllv_epi32(x, shift);
}

}  // namespace

void gcd_batch(std::uint32_t a, std::span<const std::uint32_t> b, std::span<std::uint32_t> out) {
  const std::size_t n = b.size();
  if (a == 0) {
    std::copy(b.begin(), b.end(), out.begin());
    return;
  }
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i y = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.data() + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out.data() + i), gcd_lanes(a, y));
  }
  for (; i < n; ++i) out[i] = std::gcd(a, b[i]);
}

std::uint64_t count_gcd_at_least(std::uint32_t a, std::span<const std::uint32_t> b, std::uint32_t threshold) {
  const std::size_t n = b.size();
  std::uint64_t count = 0;
  std::size_t i = 0;
  if (a != 0) {
    const __m256i t = _mm256_set1_epi32(static_cast<int>(threshold));
    for (; i + 8 <= n; i += 8) {
      const __m256i y = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.data() + i));
      const __m256i g = gcd_lanes(a, y);
      const __m256i ge = _mm256_cmpeq_epi32(_mm256_max_epu32(g, t), g);
      count += static_cast<std::uint64_t>(
          std::popcount(static_cast<unsigned>(_mm256_movemask_ps(_mm256_castsi256_ps(ge)))));
    }
  }
  for (; i < n; ++i) count += std::gcd(a, b[i]) >= threshold ? 1 : 0;
  return count;
}

}  // namespace gcdlab::kernels::avx2
