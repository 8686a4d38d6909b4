#include <atomic>

#include "gcdlab/kernels.hpp"

namespace gcdlab::kernels {

#ifndef GCDLAB_HAVE_AVX2
namespace avx2 {
void gcd_batch(std::uint32_t a, std::span<const std::uint32_t> b, std::span<std::uint32_t> out) {
  scalar::gcd_batch(a, b, out);
}
std::uint64_t count_gcd_at_least(std::uint32_t a, std::span<const std::uint32_t> b, std::uint32_t threshold) {
  return scalar::count_gcd_at_least(a, b, threshold);
}
}  // namespace avx2
#endif

bool avx2::available() {
#if defined(GCDLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2");
  return ok;
#else
  return false;
#endif
}

namespace {

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{detected_isa()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Avx2:
      return "avx2";
    case Isa::Scalar:
      break;
  }
  return "scalar";
}

Isa detected_isa() { return avx2::available() ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

Isa set_active_isa(Isa isa) {
  if (isa == Isa::Avx2 && !avx2::available()) isa = Isa::Scalar;
  return active_slot().exchange(isa);
}

void gcd_batch(std::uint32_t a, std::span<const std::uint32_t> b, std::span<std::uint32_t> out) {
  if (active_isa() == Isa::Avx2) {
    avx2::gcd_batch(a, b, out);
  } else {
    scalar::gcd_batch(a, b, out);
  }
}

std::uint64_t count_gcd_at_least(std::uint32_t a, std::span<const std::uint32_t> b, std::uint32_t threshold) {
  return active_isa() == Isa::Avx2 ? avx2::count_gcd_at_least(a, b, threshold)
                                   : scalar::count_gcd_at_least(a, b, threshold);
}

}  // namespace gcdlab::kernels
