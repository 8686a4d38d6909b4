#pragma once

// Explicit extremal families: multiples of D (the sharp delta = 1 example),
// multiples of floor(delta D) (sharp for delta < 1), the rational-primorial
// family that defeats the non-dyadic squarefree-style bound, and the set of
// squarefree integers up to n.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gcdlab/instance.hpp"

namespace gcdlab {

struct FamilyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct FamilyReport {
  std::string family;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::size_t size_a = 0;
  std::size_t size_b = 0;
  Rational measured_delta;
  double extremal_ratio = 0;
  std::vector<FamilyCheck> checks;

  bool all_passed() const;
};

struct Family {
  ElementSet a;
  ElementSet b;
  FamilyReport report;
};

// A = multiples of D in [X, 2X], B = multiples of D in [Y, 2Y]. Checks
// delta = 1 and |A| D in [X - D, X + D]. extremal_ratio = |A||B| D^2 / XY.
// Throws InvalidInput on D = 0 or D > min(X, Y).
Family remark2_family(std::uint64_t x, std::uint64_t y, std::uint64_t d);

// A = B = multiples of D0 = floor(delta D) in [X, 2X]. Reports the measured
// fraction of pairs with gcd >= D and |A||B| against delta^{-2} X^2 / D^2
// (extremal_ratio). Throws InvalidInput unless delta in (0, 1], D delta >= 1
// and D0 <= X.
Family remark3_family(std::uint64_t x, std::uint64_t d, const Rational& delta);

struct Sec5Family {
  ElementSet a;
  FamilyReport report;
  Natural max_ratio;       // max over pairs of a1 a2 / gcd(a1, a2)^2
  double growth_constant;  // |A| / (X log X)
};

// A = {P m / n : mn <= X, m and n squarefree, gcd(m, n) = 1} with P the
// product of the primes up to X. Checks every pair ratio <= X^2 exactly,
// |A| >= X, and that A is not entirely squarefree when X >= 3.
// Throws InvalidInput on X < 2.
Sec5Family sec5_family(std::uint64_t x);

// A = B = squarefree integers in [1, n]; delta for the predicate
// ab / gcd^2 <= Q and the squarefree bound evaluated on it.
Family squarefree_instance(std::uint64_t n, const Rational& q, const Rational& epsilon, std::uint64_t p0);

std::vector<std::uint64_t> squarefree_up_to(std::uint64_t n);

}  // namespace gcdlab
