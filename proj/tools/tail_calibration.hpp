#pragma once

// Tail-ratio sweep shared by the calibration tool and the acceptance suite.
// Two populations with c <= 1: saturated configurations over a fixed lambda
// grid, and random configurations whose admissible c comes out at most 1.
// Records the largest tail / lambda^{q + eps} at the best center.

#include <array>
#include <cstdint>

#include "gcdlab/arith.hpp"

namespace gcdlab {

inline constexpr std::array<double, 5> kTailLambdaGrid{0.8, 0.4, 0.2, 0.1, 0.05};

struct TailSweep {
  std::uint64_t configurations = 0;  // saturated configurations evaluated
  std::uint64_t skipped = 0;         // budget below 1, no c <= 1 measure
  std::uint64_t random_drawn = 0;
  std::uint64_t random_kept = 0;  // random draws with c <= 1
  double saturated_max_ratio = 0;
  double random_max_ratio = 0;
  double max_ratio = 0;  // over both populations
  double max_c = 0;      // largest admissible c seen (should be <= 1)
  double worst_lambda = 0;
};

TailSweep tail_sweep(std::uint64_t seed, std::uint64_t per_lambda, std::uint64_t random_draws,
                     const Rational& epsilon);

}  // namespace gcdlab
