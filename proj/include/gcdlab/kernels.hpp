#pragma once

// Batched gcd kernels for the pair census.
//
// Each kernel has a scalar reference in kernels::scalar and, when the build
// targets x86-64, an AVX2 variant in kernels::avx2. The unqualified entry
// points dispatch on the CPU detected at first use. Both variants must agree
// bit for bit; tests/test_kernels.cpp holds them to that.

#include <cstdint>
#include <span>
#include <string_view>

namespace gcdlab::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

// Best ISA this CPU and build both support.
Isa detected_isa();

// ISA used by the dispatching entry points. Defaults to detected_isa().
Isa active_isa();

// Pins the dispatch target; requesting an unsupported ISA falls back to scalar.
// Returns the previous setting.
Isa set_active_isa(Isa isa);

class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : previous_(set_active_isa(isa)) {}
  ~ScopedIsa() { set_active_isa(previous_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

// out[i] = gcd(a, b[i]); out.size() must equal b.size(). gcd(0, 0) = 0.
void gcd_batch(std::uint32_t a, std::span<const std::uint32_t> b, std::span<std::uint32_t> out);

// #{i : gcd(a, b[i]) >= threshold}
std::uint64_t count_gcd_at_least(std::uint32_t a, std::span<const std::uint32_t> b, std::uint32_t threshold);

namespace scalar {
void gcd_batch(std::uint32_t a, std::span<const std::uint32_t> b, std::span<std::uint32_t> out);
std::uint64_t count_gcd_at_least(std::uint32_t a, std::span<const std::uint32_t> b, std::uint32_t threshold);
}  // namespace scalar

namespace avx2 {
bool available();
void gcd_batch(std::uint32_t a, std::span<const std::uint32_t> b, std::span<std::uint32_t> out);
std::uint64_t count_gcd_at_least(std::uint32_t a, std::span<const std::uint32_t> b, std::uint32_t threshold);
}  // namespace avx2

}  // namespace gcdlab::kernels
