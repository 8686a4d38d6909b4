#include "gcdlab/structure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "gcdlab/errors.hpp"

namespace gcdlab {

namespace {

Rational count_ratio(std::size_t num, std::size_t den) {
  Rational r(Natural(static_cast<unsigned long>(num)), Natural(static_cast<unsigned long>(den)));
  r.canonicalize();
  return r;
}

Rational as_rational(std::size_t n) { return Rational(Natural(static_cast<unsigned long>(n))); }

std::set<Prime> primes_of(std::initializer_list<const FactoredNat*> values) {
  std::set<Prime> out;
  for (const auto* v : values) {
    for (const auto& [p, e] : v->factors()) out.insert(p);
  }
  return out;
}

using Mask = std::vector<std::uint64_t>;

std::size_t popcount(const Mask& m) {
  std::size_t c = 0;
  for (auto w : m) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

struct PrimeCandidates {
  Prime p = 0;
  std::vector<int> ks;
  std::vector<Mask> masks;
  std::vector<std::size_t> counts;
};

}  // namespace

DefectDecomposition defect(const FactoredNat& a, const FactoredNat& modulus) {
  FactorMap plus, minus;
  for (const auto& [p, v] : rational_valuations(a, modulus)) {
    if (v > 1 || v < -1) {
      throw InvalidDefect("defect: v_" + std::to_string(p) + "(" + a.str() + "/" + modulus.str() +
                          ") = " + std::to_string(v) + " lies outside {-1, 0, 1}");
    }
    (v > 0 ? plus : minus)[p] = 1;
  }
  FactoredNat pl(std::move(plus));
  FactoredNat mi(std::move(minus));
  FactoredNat star = pl * mi;
  return DefectDecomposition{std::move(pl), std::move(mi), std::move(star)};
}

FactoredNat recover_element(const DefectDecomposition& d, const FactoredNat& modulus) {
  FactorMap f = modulus.factors();
  for (const auto& [p, e] : d.plus.factors()) f[p] += e;
  for (const auto& [p, e] : d.minus.factors()) {
    f[p] -= e;
    if (f[p] < 0) throw InvalidInput("recover_element: N * a+ / a- is not an integer");
  }
  std::erase_if(f, [](const auto& kv) { return kv.second == 0; });
  return FactoredNat(std::move(f));
}

bool check_pivotal(const FactoredNat& a, const FactoredNat& b, const FactoredNat& modulus) {
  for (Prime p : primes_of({&a, &b, &modulus})) {
    const int k = modulus.valuation(p);
    if (std::abs(a.valuation(p) - k) + std::abs(b.valuation(p) - k) > 1) return false;
  }
  return true;
}

ValuationMeasure valuation_measure(const GcdInstance& inst, const PairSet& omega, Prime p) {
  if (omega.empty()) throw InvalidInput("valuation measure: pair set is empty");
  if (!PrimeTable::shared().is_prime(p)) throw InvalidInput(std::to_string(p) + " is not prime");
  ValuationMeasure m;
  m.p = p;
  std::map<int, std::size_t> ca, cb;
  for (const auto& v : inst.a()) ++ca[v.valuation(p)];
  for (const auto& v : inst.b()) ++cb[v.valuation(p)];
  for (const auto& [i, c] : ca) m.alpha[i] = count_ratio(c, inst.a().size());
  for (const auto& [j, c] : cb) m.beta[j] = count_ratio(c, inst.b().size());
  std::map<std::pair<int, int>, std::size_t> cm;
  for (const auto& [i, j] : omega.edges) ++cm[{inst.a()[i].valuation(p), inst.b()[j].valuation(p)}];
  for (const auto& [ij, c] : cm) m.mu[ij] = count_ratio(c, omega.size());
  return m;
}

Rational StructuredInstance::retained_fraction() const {
  if (omega.empty()) return Rational(0);
  return count_ratio(omega_prime.size(), omega.size());
}

StructuredInstance with_modulus(const GcdInstance& inst, const PairSet& omega, FactoredNat modulus) {
  std::vector<PairSet::Edge> kept;
  for (const auto& e : omega.edges) {
    if (check_pivotal(inst.a()[e.first], inst.b()[e.second], modulus)) kept.push_back(e);
  }
  PairSet filtered{std::move(kept), omega.size_a, omega.size_b};
  return StructuredInstance{inst, omega, std::move(modulus), std::move(filtered), ModulusSearch::Exhaustive};
}

StructuredInstance find_modulus(const GcdInstance& inst, const PairSet& omega, ModulusOptions options) {
  const std::size_t words = (omega.size() + 63) / 64;
  std::set<Prime> primes;
  for (const auto* side : {&inst.a(), &inst.b()}) {
    for (const auto& v : *side) {
      for (const auto& [p, e] : v.factors()) primes.insert(p);
    }
  }

  FactorMap chosen;
  std::vector<PrimeCandidates> open;  // primes where no single k keeps every pair
  for (Prime p : primes) {
    int lo = 0, hi = 0;
    bool first = true;
    for (const auto* side : {&inst.a(), &inst.b()}) {
      for (const auto& v : *side) {
        const int e = v.valuation(p);
        lo = first ? e : std::min(lo, e);
        hi = first ? e : std::max(hi, e);
        first = false;
      }
    }
    PrimeCandidates c;
    c.p = p;
    bool settled = false;
    for (int k = lo; k <= hi; ++k) {
      Mask mask(words, 0);
      std::size_t count = 0;
      for (std::size_t e = 0; e < omega.size(); ++e) {
        const auto [i, j] = omega.edges[e];
        if (std::abs(inst.a()[i].valuation(p) - k) + std::abs(inst.b()[j].valuation(p) - k) <= 1) {
          mask[e / 64] |= std::uint64_t{1} << (e % 64);
          ++count;
        }
      }
      if (count == omega.size()) {
        // Keeping every pair is optimal whatever the other primes do.
        if (k > 0) chosen[p] = k;
        settled = true;
        break;
      }
      c.ks.push_back(k);
      c.masks.push_back(std::move(mask));
      c.counts.push_back(count);
    }
    if (!settled) open.push_back(std::move(c));
  }

  long double space = 1;
  for (const auto& c : open) space *= static_cast<long double>(c.ks.size());
  const bool exhaustive = space <= static_cast<long double>(options.exhaustive_limit);

  if (exhaustive) {
    std::vector<std::size_t> pick(open.size(), 0), best_pick;
    long best = -1;
    std::vector<Mask> stack(open.size() + 1);
    stack[0].assign(words, ~std::uint64_t{0});
    if (words > 0 && omega.size() % 64 != 0) stack[0].back() = (std::uint64_t{1} << (omega.size() % 64)) - 1;
    // Depth-first over k vectors in lexicographic order; only strict
    // improvements replace the incumbent.
    auto dfs = [&](auto&& self, std::size_t depth) -> void {
      const long current = static_cast<long>(popcount(stack[depth]));
      if (current <= best) return;
      if (depth == open.size()) {
        best = current;
        best_pick = pick;
        return;
      }
      const auto& c = open[depth];
      for (std::size_t t = 0; t < c.ks.size(); ++t) {
        if (static_cast<long>(c.counts[t]) <= best) continue;
        stack[depth + 1] = stack[depth];
        for (std::size_t w = 0; w < words; ++w) stack[depth + 1][w] &= c.masks[t][w];
        pick[depth] = t;
        self(self, depth + 1);
      }
    };
    dfs(dfs, 0);
    if (best < 0) best_pick.assign(open.size(), 0);  // empty omega
    for (std::size_t d = 0; d < open.size(); ++d) {
      const int k = open[d].ks[best_pick[d]];
      if (k > 0) chosen[open[d].p] = k;
    }
  } else {
    for (const auto& c : open) {
      std::map<int, std::size_t> freq;
      for (const auto& [i, j] : omega.edges) {
        ++freq[inst.a()[i].valuation(c.p)];
        ++freq[inst.b()[j].valuation(c.p)];
      }
      std::size_t best_t = 0;
      for (std::size_t t = 1; t < c.ks.size(); ++t) {
        const auto f = [&](std::size_t u) { return freq.contains(c.ks[u]) ? freq.at(c.ks[u]) : 0; };
        if (c.counts[t] > c.counts[best_t] || (c.counts[t] == c.counts[best_t] && f(t) > f(best_t))) {
          best_t = t;
        }
      }
      if (c.ks[best_t] > 0) chosen[c.p] = c.ks[best_t];
    }
  }

  StructuredInstance si = with_modulus(inst, omega, FactoredNat(std::move(chosen)));
  si.search = exhaustive ? ModulusSearch::Exhaustive : ModulusSearch::Greedy;
  return si;
}

std::vector<QuadRow> quad_identity_table(const FactoredNat& a, const FactoredNat& b,
                                         const FactoredNat& modulus) {
  if (!check_pivotal(a, b, modulus)) {
    throw InvalidInput("quad identity: (" + a.str() + ", " + b.str() +
                       ") fails the pivotal condition for N = " + modulus.str());
  }
  const auto da = defect(a, modulus);
  const auto db = defect(b, modulus);
  std::vector<QuadRow> rows;
  for (Prime p : primes_of({&a, &b, &modulus})) {
    QuadRow r;
    r.p = p;
    r.va = a.valuation(p) - modulus.valuation(p);
    r.vb = b.valuation(p) - modulus.valuation(p);
    r.star_a = da.star.valuation(p);
    r.star_b = db.star.valuation(p);
    r.ok = r.star_a + r.star_b == std::abs(r.va - r.vb);
    rows.push_back(r);
  }
  return rows;
}

bool quad_identity_check(const FactoredNat& a, const FactoredNat& b, const FactoredNat& modulus) {
  if (!check_pivotal(a, b, modulus)) {
    throw InvalidInput("quad identity: (" + a.str() + ", " + b.str() +
                       ") fails the pivotal condition for N = " + modulus.str());
  }
  const Natural lhs = defect(a, modulus).star.value() * defect(b, modulus).star.value();
  Natural g;
  mpz_gcd(g.get_mpz_t(), a.value().get_mpz_t(), b.value().get_mpz_t());
  const Natural rhs = (a.value() * b.value()) / (g * g);
  return lhs == rhs;
}

DefectCensus defect_census(const ElementSet& s, const FactoredNat& modulus, const Rational& x,
                           const Rational& t) {
  const Rational n(modulus.value());
  DefectCensus out;
  out.bound = 2 * t;
  out.plus_bound = std::sqrt(Rational(2 * x * t / n).get_d());
  out.minus_bound = std::sqrt(Rational(n * t / x).get_d());
  for (const auto& a : s) {
    const Rational v(a.value());
    if (v < x || v > 2 * x) {
      throw InvalidInput("defect census: " + a.str() + " lies outside [X, 2X] = [" + format_rational(x) +
                         ", " + format_rational(2 * x) + "]");
    }
  }
  for (const auto& a : s) {
    const auto d = defect(a, modulus);
    if (Rational(d.star.value()) > t) continue;
    ++out.count;
    const Rational plus(d.plus.value());
    const Rational minus(d.minus.value());
    if (plus * plus * n > 2 * x * t || minus * minus * x > n * t) ++out.range_failures;
  }
  out.holds = as_rational(out.count) <= out.bound;
  out.ranges_hold = out.range_failures == 0;
  return out;
}

WitnessReport extract_witnesses(const StructuredInstance& si) {
  const auto& inst = si.base;
  if (!inst.dyadic()) throw InvalidInput("witnesses: instance must have dyadic ranges");
  if (si.omega_prime.empty()) throw InvalidInput("witnesses: Omega' is empty");

  const std::size_t na = inst.a().size();
  const std::size_t nb = inst.b().size();
  WitnessReport r;
  r.product = as_rational(na) * as_rational(nb);
  r.delta_omega = si.omega.delta();
  r.delta_prime = si.omega_prime.delta();
  r.delta = 2 * r.delta_prime;

  const auto deg = si.omega_prime.degrees_a();
  r.degree_required = r.delta * as_rational(nb) / 4;
  r.heavy_required = r.delta * as_rational(na) / 4;
  r.a_star_required = r.delta * as_rational(na) / 8;
  r.b_star_required = r.delta * as_rational(nb) / 8;

  std::vector<std::size_t> heavy;
  for (std::size_t i = 0; i < na; ++i) {
    if (as_rational(deg[i]) >= r.degree_required) heavy.push_back(i);
  }
  r.heavy_count = heavy.size();
  if (as_rational(heavy.size()) < r.heavy_required) {
    throw ConsistencyFailure("witnesses: averaging left only " + std::to_string(heavy.size()) +
                             " heavy elements");
  }

  auto best_by_star = [&](const std::vector<std::size_t>& idx, const ElementSet& side) {
    std::size_t best = idx.front();
    Natural best_star = defect(side[best], si.modulus).star.value();
    for (std::size_t k = 1; k < idx.size(); ++k) {
      Natural star = defect(side[idx[k]], si.modulus).star.value();
      if (star > best_star) {
        best = idx[k];
        best_star = star;
      }
    }
    return best;
  };

  r.a_index = best_by_star(heavy, inst.a());
  r.a = inst.a()[r.a_index];
  r.a_defect = defect(r.a, si.modulus);
  r.degree = deg[r.a_index];
  if (Rational(r.a_defect.star.value()) < r.a_star_required) {
    throw ConsistencyFailure("witnesses: no heavy element has a* >= delta |A| / 8");
  }

  std::vector<std::size_t> neighbours;
  for (const auto& [i, j] : si.omega_prime.edges) {
    if (i == r.a_index) neighbours.push_back(j);
  }
  r.b_index = best_by_star(neighbours, inst.b());
  r.b = inst.b()[r.b_index];
  r.b_defect = defect(r.b, si.modulus);
  if (Rational(r.b_defect.star.value()) < r.b_star_required) {
    throw ConsistencyFailure("witnesses: no neighbour has b* >= delta |B| / 8");
  }

  if (!quad_identity_check(r.a, r.b, si.modulus)) {
    throw ConsistencyFailure("witnesses: a* b* differs from ab / gcd(a, b)^2");
  }
  r.star_product = r.a_defect.star.value() * r.b_defect.star.value();
  const Rational scale = inst.x() * inst.y() / (inst.d() * inst.d());
  r.star_product_bound = 4 * scale;
  if (Rational(r.star_product) > r.star_product_bound) {
    throw ConsistencyFailure("witnesses: a* b* exceeds 4XY / D^2");
  }
  r.bound = 1000 * scale / (r.delta * r.delta);
  r.bound_prime = 1000 * scale / (r.delta_prime * r.delta_prime);
  r.holds = r.product <= r.bound;
  return r;
}

}  // namespace gcdlab
