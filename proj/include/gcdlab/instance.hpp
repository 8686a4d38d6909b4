#pragma once

// GCD instances: two finite sets in dyadic ranges, the threshold D, the pair
// set of pairs meeting it, and the closed-form bounds evaluated on them.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gcdlab/arith.hpp"

namespace gcdlab {

// Sorted ascending, pairwise distinct.
using ElementSet = std::vector<FactoredNat>;

ElementSet make_element_set(std::span<const std::uint64_t> values);

struct Params {
  Rational epsilon{1, 2};
  std::uint64_t p0 = 100;
};

class GcdInstance {
 public:
  // X, Y, D >= 1, D <= min(X, Y), A subset of [X, 2X], B subset of [Y, 2Y],
  // both nonempty, epsilon in (0, 1). Throws InvalidInput naming the field.
  static GcdInstance make(ElementSet a, ElementSet b, Rational x, Rational y, Rational d, Params params = {});

  // X := min(A), Y := min(B); throws if max(A) > 2 min(A) (likewise for B).
  static GcdInstance infer_ranges(ElementSet a, ElementSet b, Rational d, Params params = {});

  // No range checks. X and Y are set to min(A), min(B) for reporting only;
  // structure operations that rely on dyadic placement refuse relaxed
  // instances.
  static GcdInstance relaxed(ElementSet a, ElementSet b, Rational d, Params params = {});

  const ElementSet& a() const { return a_; }
  const ElementSet& b() const { return b_; }
  const Rational& x() const { return x_; }
  const Rational& y() const { return y_; }
  const Rational& d() const { return d_; }
  const Params& params() const { return params_; }
  const Rational& epsilon() const { return params_.epsilon; }
  std::uint64_t p0() const { return params_.p0; }
  bool dyadic() const { return dyadic_; }

  Rational q() const { return 2 + params_.epsilon; }
  Rational q_prime() const { return (2 + params_.epsilon) / (1 + params_.epsilon); }

  // gcds are integers, so gcd >= D iff gcd >= ceil(D).
  Natural gcd_threshold() const { return ceil_natural(d_); }

  // Elements as 32-bit words when every element of A and B fits.
  const std::optional<std::vector<std::uint32_t>>& a_words() const { return a_words_; }
  const std::optional<std::vector<std::uint32_t>>& b_words() const { return b_words_; }

 private:
  GcdInstance() = default;
  void finish();

  ElementSet a_;
  ElementSet b_;
  Rational x_;
  Rational y_;
  Rational d_;
  Params params_;
  bool dyadic_ = true;
  std::optional<std::vector<std::uint32_t>> a_words_;
  std::optional<std::vector<std::uint32_t>> b_words_;
};

// Edges are (index into A, index into B), sorted lexicographically.
struct PairSet {
  using Edge = std::pair<std::uint32_t, std::uint32_t>;

  std::vector<Edge> edges;
  std::size_t size_a = 0;
  std::size_t size_b = 0;

  std::size_t size() const { return edges.size(); }
  bool empty() const { return edges.empty(); }
  Rational delta() const;
  bool contains(Edge e) const;
  std::vector<std::uint32_t> degrees_a() const;
  std::vector<std::uint32_t> degrees_b() const;
};

PairSet make_pair_set(std::size_t size_a, std::size_t size_b, std::vector<PairSet::Edge> edges);

// Pairs with gcd(a, b) >= D.
PairSet build_omega_gcd(const GcdInstance& inst);
PairSet build_omega_gcd(const ElementSet& a, const ElementSet& b, const Rational& d);

// Pairs with ab / gcd(a, b)^2 <= Q.
PairSet build_omega_ratio(const ElementSet& a, const ElementSet& b, const Rational& q);

// #{(a, b) : gcd(a, b) >= D} by the double loop (SIMD kernel when the
// elements fit 32 bits).
std::uint64_t count_pairs_geq_naive(const ElementSet& a, const ElementSet& b, const Rational& d);

// Same count by divisor classes: c(d) = #(d | a) * #(d | b), exact-gcd counts
// e(d) = c(d) - sum_{k >= 2} e(kd) taken in descending order, summed over
// d >= D. Only divisors shared by both sides are visited.
std::uint64_t count_pairs_geq_fast(const ElementSet& a, const ElementSet& b, const Rational& d);

struct PrimeSets {
  std::set<Prime> all;    // primes dividing some element
  std::set<Prime> small;  // the subset <= p0
};

PrimeSets prime_sets(std::span<const FactoredNat> s, std::uint64_t p0);
PrimeSets prime_sets(const GcdInstance& inst);  // over A union B

struct BoundCheck {
  double bound = 0;  // the right-hand side
  double log_bound = 0;
  double product = 0;  // |A||B|
  bool holds = true;
};

// 1000^{1 + #P_sml(A u B)} delta^{-2-eps} XY / D^2. A violation is reported
// only when ln|A||B| exceeds ln(bound) by more than 1e-9, so rounding in the
// irrational power cannot raise a false alarm. Throws on delta <= 0.
BoundCheck theorem1_bound(const GcdInstance& inst, const Rational& delta);

struct ChaseCheck {
  bool holds = false;
  Natural max_allowed;  // floor(X / D) + 1
  std::optional<Natural> min_gap;
};

// Pairwise gcd(a, a') >= D for distinct elements forces gaps >= D, hence
// |A| <= floor(X / D) + 1 inside [X, 2X]. Throws InvalidInput when A leaves
// [X, 2X] or some pair has gcd < D.
ChaseCheck chase_diagonal_bound(const ElementSet& a, const Rational& x, const Rational& d);

struct SquarefreeCheck {
  Rational delta;
  std::optional<double> bound;  // absent when delta = 0 (hypothesis vacuous)
  bool holds = true;
};

// Squarefree variant with the predicate ab / gcd^2 <= Q and right-hand side
// 1000^{1 + #P_sml(A u B)} delta^{-2-eps} Q / 4. Throws InvalidInput if any
// element is not squarefree.
SquarefreeCheck theorem51_bound(const ElementSet& a, const ElementSet& b, const Rational& q,
                                const Rational& epsilon, std::uint64_t p0);

// Instance file: JSON object with A, B (arrays of decimal strings), X, Y, D,
// epsilon (decimal strings) and p0 (integer). X and Y are optional on input
// and inferred from min(A), min(B) when absent. Sets outside dyadic ranges
// are stored with "relaxed": true in place of X and Y. write_instance emits
// every field in canonical form, so write(read(write(i))) == write(i).
std::string write_instance(const GcdInstance& inst);
GcdInstance read_instance(const std::string& text);
GcdInstance load_instance_file(const std::string& path);

}  // namespace gcdlab
