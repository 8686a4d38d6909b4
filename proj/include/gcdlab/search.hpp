#pragma once

// Extremal-set search on small universes and the violation hunter.
//
// The full main-theorem inequality is not hunted: its constant
// 1000^{1 + #P_sml} dwarfs anything reachable at desk scale. The hunter
// targets the sharp constituent bounds instead: the diagonal bound
// |A| <= floor(X / D) + 1 and the witness-chain bound
// |A||B| <= 1000 delta^{-2} XY / D^2 on Omega'.

#include <cstdint>
#include <string>
#include <vector>

#include "gcdlab/instance.hpp"
#include "gcdlab/random.hpp"

namespace gcdlab {

enum class SearchMode { ExactDeltaOne, ThresholdDelta };

struct SearchSpace {
  std::uint64_t x = 1;
  std::uint64_t y = 1;
  std::uint64_t d = 1;
  Rational delta_target{1};
  SearchMode mode = SearchMode::ExactDeltaOne;
  std::uint64_t limit = 20;  // integers per side
  bool symmetric = false;    // force A = B
  // Stop a symmetric search as soon as it reaches floor(X / D) + 1. Off when
  // the search is itself testing that bound.
  bool chase_prune = true;
};

inline constexpr std::uint64_t kThresholdExactLimit = 12;

struct SearchResult {
  std::vector<std::uint64_t> best_a;
  std::vector<std::uint64_t> best_b;
  std::uint64_t max_product = 0;
  std::uint64_t good_pairs = 0;
  bool exact = true;  // false: randomized local search, max_product is a lower bound
  std::uint64_t nodes = 0;
};

// Maximises |A||B| over A in [X, 2X], B in [Y, 2Y] with every pair having
// gcd >= D (ExactDeltaOne) or at least delta_target |A||B| such pairs
// (ThresholdDelta). Among maximisers the lexicographically smallest A wins.
// B is the full common neighbourhood of A (ExactDeltaOne) or the k elements
// with the most good partners, smaller elements first on ties. ThresholdDelta is exact up to
// kThresholdExactLimit integers per side and a seeded local search above.
// Throws InvalidInput when a side exceeds limit (or 64), D = 0, delta_target
// is outside (0, 1], or a symmetric search is asked for with X != Y or in
// ThresholdDelta mode.
SearchResult exhaustive_max(const SearchSpace& space, std::uint64_t seed = 0);

struct Violation {
  std::string kind;
  std::string instance;
  std::string detail;
};

struct HuntSummary {
  std::uint64_t diagonal_cases = 0;
  std::uint64_t structured_cases = 0;
  std::uint64_t structured_skipped = 0;  // Omega empty, nothing to check
  std::uint64_t remark2_cases = 0;
  std::vector<Violation> violations;
};

struct StructuredOutcome {
  bool checked = false;  // false when Omega or Omega' is empty
  std::vector<Violation> violations;
};

// find_modulus, then the witness chain on Omega' and the defect census of
// both sides over T = 1, 2, 4, ... past the largest defect.
StructuredOutcome check_structured(const GcdInstance& inst);

// (a) every diagonal case X <= scale_limit, D <= X, with A = B searched
// exhaustively against floor(X / D) + 1; (b) `structured` seeded instances
// through check_structured; (c) multiples-of-D families over a grid, both the
// family checks and check_structured.
HuntSummary hunt_violations(std::uint64_t scale_limit, std::uint64_t seed, std::uint64_t structured = 10'000);

// The seeded instance generator behind (b).
GcdInstance random_structured_instance(Rng& rng);

}  // namespace gcdlab
