#include <limits>
#include <vector>

#include "doctest.h"
#include "gcdlab/kernels.hpp"
#include "gcdlab/random.hpp"
#include "oracles.hpp"

using namespace gcdlab;
using namespace gcdlab::kernels;

namespace {

std::vector<std::uint32_t> edge_values() {
  return {0u,
          1u,
          2u,
          3u,
          4u,
          6u,
          7u,
          8u,
          12u,
          1u << 31,
          (1u << 31) + 1,
          (1u << 31) - 1,
          std::numeric_limits<std::uint32_t>::max(),
          4294967291u,
          65536u,
          65535u,
          3u << 30,
          1000000u};
}

}  // namespace

TEST_CASE("scalar kernel matches Euclid") {
  const auto vals = edge_values();
  std::vector<std::uint32_t> out(vals.size());
  for (auto a : vals) {
    scalar::gcd_batch(a, vals, out);
    for (std::size_t i = 0; i < vals.size(); ++i) CHECK(out[i] == oracle::euclid(a, vals[i]));
  }
}

TEST_CASE("avx2 kernel equals scalar kernel") {
  if (!avx2::available()) {
    MESSAGE("AVX2 not available on this machine; equivalence not exercised");
    return;
  }
  const auto vals = edge_values();
  for (auto a : vals) {
    std::vector<std::uint32_t> s(vals.size()), v(vals.size());
    scalar::gcd_batch(a, vals, s);
    avx2::gcd_batch(a, vals, v);
    CHECK(s == v);
  }
  Rng rng(42);
  for (int round = 0; round < 2000; ++round) {
    // lengths across the 8-lane boundary, including tails
    const std::size_t n = static_cast<std::size_t>(rng.between(0, 41));
    std::vector<std::uint32_t> b(n);
    const int mode = static_cast<int>(rng.below(3));
    for (auto& x : b) {
      if (mode == 0) x = static_cast<std::uint32_t>(rng.next());
      if (mode == 1) x = static_cast<std::uint32_t>(rng.between(0, 1000));
      if (mode == 2) x = static_cast<std::uint32_t>(rng.between(1, 5000)) << rng.between(0, 18);
    }
    const auto a = mode == 0 ? static_cast<std::uint32_t>(rng.next())
                             : static_cast<std::uint32_t>(rng.between(0, 100000));
    std::vector<std::uint32_t> s(n), v(n);
    scalar::gcd_batch(a, b, s);
    avx2::gcd_batch(a, b, v);
    CHECK(s == v);
    const auto t = static_cast<std::uint32_t>(rng.between(0, 64));
    CHECK(scalar::count_gcd_at_least(a, b, t) == avx2::count_gcd_at_least(a, b, t));
  }
}

TEST_CASE("dispatch honours the pinned ISA") {
  const Isa before = active_isa();
  {
    ScopedIsa pin(Isa::Scalar);
    CHECK(active_isa() == Isa::Scalar);
    std::vector<std::uint32_t> b{4, 6, 9}, out(3);
    gcd_batch(6, b, out);
    CHECK(out == std::vector<std::uint32_t>{2, 6, 3});
    CHECK(count_gcd_at_least(6, b, 3) == 2);
  }
  CHECK(active_isa() == before);
  {
    ScopedIsa pin(Isa::Avx2);
    CHECK(active_isa() == (avx2::available() ? Isa::Avx2 : Isa::Scalar));
  }
  CHECK(isa_name(Isa::Scalar) == "scalar");
  CHECK(isa_name(Isa::Avx2) == "avx2");
}
