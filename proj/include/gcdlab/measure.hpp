#pragma once

// Numerics for concentrated measures on Z^2.
//
// Setting: mu a finitely supported probability measure, x and y non-negative
// sequences with unit l^{q'} norm, 0 < lambda <= 4/5, and
//     mu(i, j) <= c lambda^{|i-j|} x_i y_j        for all (i, j).
// Any such c is at least 1/9, and mu puts all but O(lambda^{q+eps}) of its
// mass on the cross {(i, j) : |i-k| + |j-k| <= 1} around some diagonal point.
//
// Weights arriving from valuation measures are irrational (x_i = alpha_i^{1/q'}),
// so every weight carries an outward-rounded enclosure next to its double
// value, and verdicts are taken on the enclosures.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "gcdlab/arith.hpp"
#include "gcdlab/random.hpp"
#include "gcdlab/structure.hpp"

namespace gcdlab {

inline constexpr double kMassTolerance = 1e-12;
inline constexpr double kGuardBand = 1e-9;

struct Interval {
  double lo = 0;
  double hi = 0;

  static Interval point(double v) { return {v, v}; }
  static Interval enclose(const Rational& r);
  // [v - ulps, v + ulps] in units in the last place.
  static Interval widen(double v, int ulps);

  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

// Arithmetic on non-negative intervals, rounded outward by one ulp per step.
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);
Interval pow_enclose(const Interval& base, double exponent);
Interval pow_enclose(const Interval& base, int exponent);

using Point = std::pair<std::int64_t, std::int64_t>;

class Measure2D {
 public:
  // Non-negative weights summing to 1 within kMassTolerance. Zero weights are
  // dropped. Throws InvalidInput otherwise.
  static Measure2D from_weights(std::map<Point, double> weights);
  // Exact weights summing to exactly 1.
  static Measure2D from_rationals(const std::map<Point, Rational>& weights);
  static Measure2D point_mass(Point at);

  const std::map<Point, double>& weights() const { return weights_; }
  const std::optional<std::map<Point, Rational>>& exact() const { return exact_; }
  double total_mass() const { return total_; }
  Interval weight_enclosure(const Point& at) const;

  // Smallest and largest coordinate over the support (both axes).
  std::pair<std::int64_t, std::int64_t> coordinate_range() const;

 private:
  std::map<Point, double> weights_;
  std::optional<std::map<Point, Rational>> exact_;
  double total_ = 0;
};

struct WeightPair {
  std::map<std::int64_t, double> x;
  std::map<std::int64_t, double> y;
  std::map<std::int64_t, Interval> x_enclosure;
  std::map<std::int64_t, Interval> y_enclosure;
  double q_prime = 5.0 / 3.0;

  // ||x||_{q'} = ||y||_{q'} = 1 within kMassTolerance; throws InvalidInput.
  static WeightPair from_values(std::map<std::int64_t, double> x, std::map<std::int64_t, double> y,
                                double q_prime);
  // x_i = alpha_i^{1/q'}, y_j = beta_j^{1/q'} with q' = (2 + eps) / (1 + eps).
  static WeightPair from_densities(const std::map<int, Rational>& alpha, const std::map<int, Rational>& beta,
                                   const Rational& epsilon);

  double xv(std::int64_t i) const;
  double yv(std::int64_t j) const;
  Interval xe(std::int64_t i) const;
  Interval ye(std::int64_t j) const;
};

struct AdmissibleC {
  bool bounded = true;  // false when mu(i,j) > 0 where x_i y_j = 0
  double value = 0;     // max over the support of mu / (lambda^{|i-j|} x_i y_j)
  Interval enclosure;
  Point attained_at{0, 0};
};

// Throws InvalidInput unless 0 < lambda <= 4/5.
AdmissibleC min_admissible_c(const Measure2D& mu, const WeightPair& w, const Interval& lambda);
AdmissibleC min_admissible_c(const Measure2D& mu, const WeightPair& w, double lambda);

// Mass on |i - k| + |j - k| >= 2.
double tail_mass(const Measure2D& mu, std::int64_t k);

// argmin_k tail_mass over [min coordinate - 1, max coordinate + 1]; outside
// that window the cross around (k, k) misses the support entirely. Smallest k
// wins ties (exact for rational-backed measures, within kMassTolerance else).
std::int64_t best_center(const Measure2D& mu);

// Region index 1..6 of (i, j) relative to the center k:
//   1: i != j, i != k, j != k     2: (k, j), |j - k| >= 2
//   3: (i, k), |i - k| >= 2       4: (k, k +- 1), (k +- 1, k)
//   5: (i, i), i != k             6: (k, k)
int region_of(const Point& at, std::int64_t k);

struct SigmaDecomposition {
  std::int64_t k = 0;
  std::array<double, 6> sigma{};  // sigma[n - 1] = mass of region n
  double gamma = 0;               // 1 - sup_i x_i y_i
  std::int64_t sup_index = 0;     // where the sup is attained (smallest on ties)
};

SigmaDecomposition sigma_decomposition(const Measure2D& mu, const WeightPair& w, std::int64_t k);

struct ConcentrationReport {
  AdmissibleC c;
  bool c_at_least_ninth = false;  // enclosure does not lie below 1/9 - guard
  std::int64_t center = 0;        // best_center
  double tail = 0;
  double lambda = 0;
  double exponent = 0;             // q + eps
  double lambda_power = 0;         // lambda^{q + eps}
  double ratio = 0;                // tail / lambda^{q + eps}
  SigmaDecomposition sigma;        // at the best center
  SigmaDecomposition proof_sigma;  // at k = argmax x_i y_i
  // Sigma_n at the proof center divided by the scale the argument bounds it
  // by: lambda gamma^{2/q'}, gamma^{1/q'} lambda^2 (twice), gamma^{1/q'} lambda,
  // gamma^{2/q'}. Absent when gamma = 0.
  std::array<std::optional<double>, 5> chain_ratios;
};

// Throws InvalidInput when c is unbounded or lambda is out of range.
ConcentrationReport concentration_report(const Measure2D& mu, const WeightPair& w, const Interval& lambda,
                                         const Rational& epsilon);

struct LemmaSetup {
  Measure2D mu;
  WeightPair weights;
  Interval lambda;  // p^{-1/q}
};

// mu, x_i = alpha_i^{1/q'}, y_j = beta_j^{1/q'} and lambda = p^{-1/q} from a
// valuation measure.
LemmaSetup lemma_setup(const ValuationMeasure& vm, const Rational& epsilon);

struct Configuration {
  Measure2D mu;
  WeightPair weights;
  double lambda = 0.5;
};

// Random admissible configuration: lambda uniform in (0, 4/5], weights with
// random support and unit l^{q'} norm, mu either random on supp x times supp y
// or proportional to lambda^{|i-j|} x_i y_j.
Configuration random_configuration(Rng& rng, double q_prime);

// Configuration with c <= 1 that pushes as much mass as the budget
// lambda^{|i-j|} x_i y_j allows away from the diagonal point (0, 0). x and y
// are random perturbations of the point mass at 0. Returns nullopt when the
// total budget is below 1 (no c <= 1 measure exists for those weights).
std::optional<Configuration> saturated_configuration(Rng& rng, double lambda, double q_prime);

}  // namespace gcdlab
