#pragma once

// Structural machinery on a GCD instance: per-prime valuation measures, the
// modulus N that pins every valuation of a pair to within one step, defect
// decompositions relative to N, and the witness pair that certifies
// |A||B| <= 1000 delta^{-2} XY / D^2.

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "gcdlab/instance.hpp"

namespace gcdlab {

// a = N * plus / minus with plus, minus squarefree and coprime; star = plus * minus.
struct DefectDecomposition {
  FactoredNat plus;
  FactoredNat minus;
  FactoredNat star;
};

// Throws InvalidDefect if some |v_p(a / N)| >= 2.
DefectDecomposition defect(const FactoredNat& a, const FactoredNat& modulus);

// N * plus / minus; throws InvalidInput if that is not an integer.
FactoredNat recover_element(const DefectDecomposition& d, const FactoredNat& modulus);

// |v_p(a/N)| + |v_p(b/N)| <= 1 at every prime.
bool check_pivotal(const FactoredNat& a, const FactoredNat& b, const FactoredNat& modulus);

struct ValuationMeasure {
  Prime p = 2;
  std::map<int, Rational> alpha;               // |A_i| / |A|
  std::map<int, Rational> beta;                // |B_j| / |B|
  std::map<std::pair<int, int>, Rational> mu;  // |Omega n (A_i x B_j)| / |Omega|
};

// Throws InvalidInput on an empty pair set.
ValuationMeasure valuation_measure(const GcdInstance& inst, const PairSet& omega, Prime p);

enum class ModulusSearch { Exhaustive, Greedy };

struct StructuredInstance {
  GcdInstance base;
  PairSet omega;
  FactoredNat modulus;
  PairSet omega_prime;  // exactly the pairs of omega passing check_pivotal
  ModulusSearch search = ModulusSearch::Exhaustive;

  Rational retained_fraction() const;  // |Omega'| / |Omega|
};

struct ModulusOptions {
  // Exhaustive search runs when the product of per-prime candidate ranges is
  // at most this; otherwise each prime is optimised on its own.
  std::uint64_t exhaustive_limit = 1'000'000;
};

// Chooses N = prod p^{k_p} over the primes of A u B, maximising |Omega'|.
// Exhaustive mode returns the lexicographically smallest (k_p) among the
// maximisers (primes ascending). Greedy mode picks, per prime, the k with the
// most passing pairs, breaking ties by the most frequent valuation among pair
// endpoints and then the smallest k.
StructuredInstance find_modulus(const GcdInstance& inst, const PairSet& omega, ModulusOptions options = {});

// Filters omega through a caller-chosen modulus.
StructuredInstance with_modulus(const GcdInstance& inst, const PairSet& omega, FactoredNat modulus);

struct QuadRow {
  Prime p = 0;
  int va = 0;       // v_p(a / N)
  int vb = 0;       // v_p(b / N)
  int star_a = 0;   // v_p(a*)
  int star_b = 0;   // v_p(b*)
  bool ok = false;  // star_a + star_b == |va - vb|
};

// a* b* == ab / gcd(a, b)^2. Throws InvalidInput unless check_pivotal holds.
bool quad_identity_check(const FactoredNat& a, const FactoredNat& b, const FactoredNat& modulus);

// One row per prime dividing a, b or N.
std::vector<QuadRow> quad_identity_table(const FactoredNat& a, const FactoredNat& b,
                                         const FactoredNat& modulus);

struct DefectCensus {
  std::uint64_t count = 0;   // #{a in S : a* <= T}
  Rational bound;            // 2T
  bool holds = false;        // count <= 2T
  double plus_bound = 0;     // sqrt(2XT / N)
  double minus_bound = 0;    // sqrt(NT / X)
  bool ranges_hold = false;  // every a with a* <= T has a+ and a- inside those bounds
  std::uint64_t range_failures = 0;
};

// Requires S inside [X, 2X] (InvalidInput) and a valid defect for every
// element (InvalidDefect). The range comparisons are exact: a+^2 N <= 2XT and
// a-^2 X <= NT.
DefectCensus defect_census(const ElementSet& s, const FactoredNat& modulus, const Rational& x,
                           const Rational& t);

struct WitnessReport {
  std::size_t a_index = 0;
  std::size_t b_index = 0;
  FactoredNat a;
  FactoredNat b;
  DefectDecomposition a_defect;
  DefectDecomposition b_defect;

  Rational delta_omega;  // |Omega| / |A||B|
  Rational delta_prime;  // |Omega'| / |A||B|
  Rational delta;        // 2 |Omega'| / |A||B|, the density the chain runs on

  std::size_t heavy_count = 0;  // |A~| = #{a : deg(a) >= delta |B| / 4}
  Rational heavy_required;      // delta |A| / 4
  std::uint32_t degree = 0;     // deg(a) in Omega'
  Rational degree_required;     // delta |B| / 4
  Rational a_star_required;     // delta |A| / 8
  Rational b_star_required;     // delta |B| / 8
  Natural star_product;         // a* b*
  Rational star_product_bound;  // 4XY / D^2

  Rational product;      // |A||B|
  Rational bound;        // 1000 delta^{-2} XY / D^2
  Rational bound_prime;  // 1000 delta'^{-2} XY / D^2 (no halving)
  bool holds = false;    // product <= bound
};

// Walks the counting chain on Omega' and returns the witness pair. Throws
// InvalidInput for relaxed instances or empty Omega', and ConsistencyFailure
// if any link of the chain fails (impossible for valid input).
WitnessReport extract_witnesses(const StructuredInstance& si);

}  // namespace gcdlab
