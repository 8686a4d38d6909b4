#include "gcdlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gcdlab/errors.hpp"

namespace gcdlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double down(double v) { return std::nextafter(v, -kInf); }
double up(double v) { return std::nextafter(v, kInf); }

// Neumaier-compensated running sum.
class Accumulator {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0;
  double comp_ = 0;
};

bool in_tail(const Point& at, std::int64_t k) {
  return std::abs(at.first - k) + std::abs(at.second - k) >= 2;
}

Rational exact_tail(const std::map<Point, Rational>& w, std::int64_t k) {
  Rational s = 0;
  for (const auto& [at, m] : w) {
    if (in_tail(at, k)) s += m;
  }
  return s;
}

void check_lambda(const Interval& lambda) {
  if (!(lambda.lo > 0) || !(lambda.hi <= 0.8)) {
    throw InvalidInput("lambda must lie in (0, 4/5], got [" + std::to_string(lambda.lo) + ", " +
                       std::to_string(lambda.hi) + "]");
  }
}

std::map<std::int64_t, double> lq_normalized(const std::vector<double>& raw, std::int64_t first,
                                             double q_prime) {
  double total = 0;
  for (double r : raw) total += r;
  std::map<std::int64_t, double> out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] > 0) out[first + static_cast<std::int64_t>(i)] = std::pow(raw[i] / total, 1.0 / q_prime);
  }
  return out;
}

}  // namespace

Interval Interval::enclose(const Rational& r) {
  const double d = r.get_d();  // truncates toward zero
  if (Rational(d) == r) return point(d);
  return r > 0 ? Interval{d, up(d)} : Interval{down(d), d};
}

Interval Interval::widen(double v, int ulps) {
  Interval out{v, v};
  for (int i = 0; i < ulps; ++i) {
    out.lo = down(out.lo);
    out.hi = up(out.hi);
  }
  return out;
}

Interval operator*(const Interval& a, const Interval& b) {
  return {std::max(0.0, down(a.lo * b.lo)), up(a.hi * b.hi)};
}

Interval operator/(const Interval& a, const Interval& b) {
  return {std::max(0.0, down(a.lo / b.hi)), b.lo > 0 ? up(a.hi / b.lo) : kInf};
}

Interval pow_enclose(const Interval& base, double exponent) {
  // Library pow is within one ulp; two ulps each way encloses it.
  const Interval lo = Interval::widen(std::pow(base.lo, exponent), 2);
  const Interval hi = Interval::widen(std::pow(base.hi, exponent), 2);
  if (exponent >= 0) return {std::max(0.0, lo.lo), hi.hi};
  return {std::max(0.0, hi.lo), lo.hi};
}

Interval pow_enclose(const Interval& base, int exponent) {
  Interval out = Interval::point(1.0);
  for (int i = 0; i < exponent; ++i) out = out * base;
  return out;
}

Measure2D Measure2D::from_weights(std::map<Point, double> weights) {
  Measure2D m;
  Accumulator total;
  for (const auto& [at, w] : weights) {
    if (!(w >= 0) || !std::isfinite(w)) throw InvalidInput("measure: weights must be finite and >= 0");
    if (w > 0) {
      m.weights_[at] = w;
      total.add(w);
    }
  }
  m.total_ = total.value();
  if (std::abs(m.total_ - 1.0) > kMassTolerance) {
    throw InvalidInput("measure: total mass " + std::to_string(m.total_) + " differs from 1");
  }
  return m;
}

Measure2D Measure2D::from_rationals(const std::map<Point, Rational>& weights) {
  Measure2D m;
  std::map<Point, Rational> exact;
  Rational total = 0;
  for (const auto& [at, w] : weights) {
    if (w < 0) throw InvalidInput("measure: weights must be >= 0");
    if (w > 0) {
      exact[at] = w;
      m.weights_[at] = w.get_d();
      total += w;
    }
  }
  if (total != 1) throw InvalidInput("measure: total mass " + format_rational(total) + " differs from 1");
  m.exact_ = std::move(exact);
  m.total_ = 1.0;
  return m;
}

Measure2D Measure2D::point_mass(Point at) { return from_rationals({{at, Rational(1)}}); }

Interval Measure2D::weight_enclosure(const Point& at) const {
  if (exact_) {
    auto it = exact_->find(at);
    return it == exact_->end() ? Interval::point(0) : Interval::enclose(it->second);
  }
  auto it = weights_.find(at);
  return Interval::point(it == weights_.end() ? 0.0 : it->second);
}

std::pair<std::int64_t, std::int64_t> Measure2D::coordinate_range() const {
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const auto& [at, w] : weights_) {
    lo = std::min({lo, at.first, at.second});
    hi = std::max({hi, at.first, at.second});
  }
  if (weights_.empty()) return {0, 0};
  return {lo, hi};
}

WeightPair WeightPair::from_values(std::map<std::int64_t, double> x, std::map<std::int64_t, double> y,
                                   double q_prime) {
  if (!(q_prime > 1)) throw InvalidInput("weights: q' must exceed 1");
  WeightPair w;
  w.q_prime = q_prime;
  for (auto* side : {&x, &y}) {
    Accumulator norm;
    for (const auto& [i, v] : *side) {
      if (!(v >= 0) || !std::isfinite(v)) throw InvalidInput("weights: entries must be finite and >= 0");
      norm.add(std::pow(v, q_prime));
    }
    if (std::abs(norm.value() - 1.0) > kMassTolerance) {
      throw InvalidInput("weights: l^{q'} norm differs from 1 (sum of powers " +
                         std::to_string(norm.value()) + ")");
    }
  }
  w.x = std::move(x);
  w.y = std::move(y);
  for (const auto& [i, v] : w.x) w.x_enclosure[i] = Interval::point(v);
  for (const auto& [j, v] : w.y) w.y_enclosure[j] = Interval::point(v);
  return w;
}

WeightPair WeightPair::from_densities(const std::map<int, Rational>& alpha,
                                      const std::map<int, Rational>& beta, const Rational& epsilon) {
  const Rational q_prime = (2 + epsilon) / (1 + epsilon);
  const Rational inv = 1 / q_prime;
  const Interval e = Interval::enclose(inv);
  const double e_mid = inv.get_d();
  WeightPair w;
  w.q_prime = q_prime.get_d();
  auto fill = [&](const std::map<int, Rational>& dens, std::map<std::int64_t, double>& val,
                  std::map<std::int64_t, Interval>& enc) {
    for (const auto& [i, d] : dens) {
      if (d <= 0) continue;
      const Interval base = Interval::enclose(d);
      val[i] = std::pow(d.get_d(), e_mid);
      // base <= 1, so the power decreases as the exponent grows
      const Interval lo = pow_enclose(Interval::point(base.lo), e.hi);
      const Interval hi = pow_enclose(Interval::point(base.hi), e.lo);
      enc[i] = Interval{lo.lo, hi.hi};
    }
  };
  fill(alpha, w.x, w.x_enclosure);
  fill(beta, w.y, w.y_enclosure);
  return w;
}

double WeightPair::xv(std::int64_t i) const {
  auto it = x.find(i);
  return it == x.end() ? 0.0 : it->second;
}
double WeightPair::yv(std::int64_t j) const {
  auto it = y.find(j);
  return it == y.end() ? 0.0 : it->second;
}
Interval WeightPair::xe(std::int64_t i) const {
  auto it = x_enclosure.find(i);
  return it == x_enclosure.end() ? Interval::point(0) : it->second;
}
Interval WeightPair::ye(std::int64_t j) const {
  auto it = y_enclosure.find(j);
  return it == y_enclosure.end() ? Interval::point(0) : it->second;
}

AdmissibleC min_admissible_c(const Measure2D& mu, const WeightPair& w, const Interval& lambda) {
  check_lambda(lambda);
  AdmissibleC out;
  out.enclosure = Interval::point(0);
  bool first = true;
  for (const auto& [at, m] : mu.weights()) {
    const auto [i, j] = at;
    const double xi = w.xv(i);
    const double yj = w.yv(j);
    if (xi == 0 || yj == 0) {
      out.bounded = false;
      out.value = kInf;
      out.enclosure = Interval{kInf, kInf};
      out.attained_at = at;
      return out;
    }
    const int dist = static_cast<int>(std::abs(i - j));
    const double point = m / (std::pow(lambda.mid(), dist) * xi * yj);
    const Interval enc = mu.weight_enclosure(at) / (pow_enclose(lambda, dist) * w.xe(i) * w.ye(j));
    if (first || point > out.value) {
      out.value = point;
      out.attained_at = at;
    }
    out.enclosure.lo = first ? enc.lo : std::max(out.enclosure.lo, enc.lo);
    out.enclosure.hi = first ? enc.hi : std::max(out.enclosure.hi, enc.hi);
    first = false;
  }
  return out;
}

AdmissibleC min_admissible_c(const Measure2D& mu, const WeightPair& w, double lambda) {
  return min_admissible_c(mu, w, Interval::point(lambda));
}

double tail_mass(const Measure2D& mu, std::int64_t k) {
  if (mu.exact()) return exact_tail(*mu.exact(), k).get_d();
  Accumulator s;
  for (const auto& [at, m] : mu.weights()) {
    if (in_tail(at, k)) s.add(m);
  }
  return s.value();
}

std::int64_t best_center(const Measure2D& mu) {
  const auto [lo, hi] = mu.coordinate_range();
  std::int64_t best = lo - 1;
  if (mu.exact()) {
    Rational best_tail = exact_tail(*mu.exact(), best);
    for (std::int64_t k = lo; k <= hi + 1; ++k) {
      Rational t = exact_tail(*mu.exact(), k);
      if (t < best_tail) {
        best_tail = t;
        best = k;
      }
    }
    return best;
  }
  double best_tail = tail_mass(mu, best);
  for (std::int64_t k = lo; k <= hi + 1; ++k) {
    const double t = tail_mass(mu, k);
    if (t < best_tail - kMassTolerance) {
      best_tail = t;
      best = k;
    }
  }
  return best;
}

int region_of(const Point& at, std::int64_t k) {
  const auto [i, j] = at;
  if (i == j) return i == k ? 6 : 5;
  if (i == k) return std::abs(j - k) == 1 ? 4 : 2;
  if (j == k) return std::abs(i - k) == 1 ? 4 : 3;
  return 1;
}

SigmaDecomposition sigma_decomposition(const Measure2D& mu, const WeightPair& w, std::int64_t k) {
  SigmaDecomposition out;
  out.k = k;
  if (mu.exact()) {
    std::array<Rational, 6> s{};
    for (const auto& [at, m] : *mu.exact()) s[region_of(at, k) - 1] += m;
    for (std::size_t n = 0; n < 6; ++n) out.sigma[n] = s[n].get_d();
  } else {
    std::array<Accumulator, 6> s{};
    for (const auto& [at, m] : mu.weights()) s[region_of(at, k) - 1].add(m);
    for (std::size_t n = 0; n < 6; ++n) out.sigma[n] = s[n].value();
  }
  double sup = 0;
  bool found = false;
  for (const auto& [i, xi] : w.x) {
    const double v = xi * w.yv(i);
    if (!found || v > sup) {
      sup = v;
      out.sup_index = i;
      found = true;
    }
  }
  out.gamma = 1.0 - sup;
  return out;
}

ConcentrationReport concentration_report(const Measure2D& mu, const WeightPair& w, const Interval& lambda,
                                         const Rational& epsilon) {
  ConcentrationReport r;
  r.c = min_admissible_c(mu, w, lambda);
  if (!r.c.bounded) {
    throw InvalidInput("concentration: no finite c, mu charges a point where x_i y_j = 0");
  }
  r.c_at_least_ninth = r.c.enclosure.hi >= 1.0 / 9.0 - kGuardBand;
  r.center = best_center(mu);
  r.tail = tail_mass(mu, r.center);
  r.lambda = lambda.mid();
  r.exponent = Rational(2 + 2 * epsilon).get_d();
  r.lambda_power = std::pow(r.lambda, r.exponent);
  r.ratio = r.tail / r.lambda_power;
  r.sigma = sigma_decomposition(mu, w, r.center);
  r.proof_sigma = sigma_decomposition(mu, w, r.sigma.sup_index);
  const double g = r.proof_sigma.gamma;
  if (g > 0) {
    const double qp = w.q_prime;
    const double l = r.lambda;
    const auto& s = r.proof_sigma.sigma;
    r.chain_ratios[0] = s[0] / (l * std::pow(g, 2 / qp));
    r.chain_ratios[1] = s[1] / (std::pow(g, 1 / qp) * l * l);
    r.chain_ratios[2] = s[2] / (std::pow(g, 1 / qp) * l * l);
    r.chain_ratios[3] = s[3] / (std::pow(g, 1 / qp) * l);
    r.chain_ratios[4] = s[4] / std::pow(g, 2 / qp);
  }
  return r;
}

LemmaSetup lemma_setup(const ValuationMeasure& vm, const Rational& epsilon) {
  std::map<Point, Rational> mu;
  for (const auto& [ij, m] : vm.mu) mu[{ij.first, ij.second}] = m;
  const Rational inv_q = 1 / (2 + epsilon);
  const Interval e = Interval::enclose(inv_q);
  const double p = static_cast<double>(vm.p);
  // p >= 2, so p^{-e} decreases as e grows
  const Interval lo = Interval::widen(std::pow(p, -e.hi), 2);
  const Interval hi = Interval::widen(std::pow(p, -e.lo), 2);
  return LemmaSetup{Measure2D::from_rationals(mu), WeightPair::from_densities(vm.alpha, vm.beta, epsilon),
                    Interval{lo.lo, hi.hi}};
}

Configuration random_configuration(Rng& rng, double q_prime) {
  const double lambda = rng.chance(0.05) ? 0.8 : rng.uniform(1e-3, 0.8);
  auto side = [&](std::int64_t& first, std::size_t& n) {
    n = static_cast<std::size_t>(rng.between(1, 6));
    first = rng.between(-3, 3);
    std::vector<double> raw(n);
    for (auto& r : raw) r = rng.unit() + 1e-3;
    if (n > 1 && rng.chance(0.3)) raw[rng.below(n)] = 0;
    return lq_normalized(raw, first, q_prime);
  };
  std::int64_t fx, fy;
  std::size_t nx, ny;
  auto x = side(fx, nx);
  auto y = side(fy, ny);

  std::map<Point, double> raw;
  const bool proportional = rng.chance(0.5);
  for (const auto& [i, xi] : x) {
    for (const auto& [j, yj] : y) {
      if (proportional) {
        raw[{i, j}] = std::pow(lambda, static_cast<double>(std::abs(i - j))) * xi * yj;
      } else if (rng.chance(0.6)) {
        raw[{i, j}] = rng.unit() + 1e-6;
      }
    }
  }
  if (raw.empty()) raw[{x.begin()->first, y.begin()->first}] = 1.0;
  double total = 0;
  for (const auto& [at, v] : raw) total += v;
  for (auto& [at, v] : raw) v /= total;
  return Configuration{Measure2D::from_weights(std::move(raw)),
                       WeightPair::from_values(std::move(x), std::move(y), q_prime), lambda};
}

std::optional<Configuration> saturated_configuration(Rng& rng, double lambda, double q_prime) {
  const std::int64_t reach = rng.between(1, 4);
  auto side = [&]() {
    const double t = 0.5 * std::pow(10.0, -rng.uniform(0.0, 10.0));
    std::vector<double> raw(static_cast<std::size_t>(2 * reach + 1));
    double spread = 0;
    for (std::int64_t o = -reach; o <= reach; ++o) {
      if (o == 0) continue;
      raw[static_cast<std::size_t>(o + reach)] = rng.unit() + 1e-3;
      spread += raw[static_cast<std::size_t>(o + reach)];
    }
    for (auto& r : raw) r *= t / spread;
    raw[static_cast<std::size_t>(reach)] = 1 - t;
    return lq_normalized(raw, -reach, q_prime);
  };
  auto x = side();
  auto y = side();

  struct Cell {
    Point at;
    double budget;
  };
  std::vector<Cell> cells;
  double total = 0;
  for (const auto& [i, xi] : x) {
    for (const auto& [j, yj] : y) {
      const double b = std::pow(lambda, static_cast<double>(std::abs(i - j))) * xi * yj;
      cells.push_back({{i, j}, b});
      total += b;
    }
  }
  if (total < 1.0) return std::nullopt;
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    return std::abs(a.at.first) + std::abs(a.at.second) > std::abs(b.at.first) + std::abs(b.at.second);
  });
  std::map<Point, double> mu;
  double remaining = 1.0;
  for (const auto& c : cells) {
    if (remaining <= 0) break;
    const double take = std::min(c.budget, remaining);
    mu[c.at] = take;
    remaining -= take;
  }
  return Configuration{Measure2D::from_weights(std::move(mu)),
                       WeightPair::from_values(std::move(x), std::move(y), q_prime), lambda};
}

}  // namespace gcdlab
