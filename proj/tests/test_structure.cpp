#include <algorithm>
#include <cstdlib>

#include "doctest.h"
#include "gcdlab/errors.hpp"
#include "gcdlab/families.hpp"
#include "gcdlab/random.hpp"
#include "gcdlab/search.hpp"
#include "gcdlab/structure.hpp"
#include "oracles.hpp"

using namespace gcdlab;

namespace {

ElementSet set_of(std::vector<std::uint64_t> v) { return make_element_set(v); }
FactoredNat F(std::uint64_t v) { return factorize(v); }
Rational R(long n, long d = 1) { return Rational(n, d); }

// Pivotal test from raw integers via repeated division.
bool pivotal_oracle(std::uint64_t a, std::uint64_t b, const std::map<std::uint64_t, int>& n) {
  std::set<std::uint64_t> primes;
  for (const auto& [p, e] : oracle::trial_factor(a)) primes.insert(p);
  for (const auto& [p, e] : oracle::trial_factor(b)) primes.insert(p);
  for (const auto& [p, e] : n) primes.insert(p);
  for (auto p : primes) {
    const int k = n.count(p) ? n.at(p) : 0;
    if (std::abs(oracle::repeated_division(p, a) - k) + std::abs(oracle::repeated_division(p, b) - k) > 1) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("valuation measure examples") {
  const auto inst = GcdInstance::relaxed(set_of({2, 3, 4}), set_of({2, 6}), R(2));
  const PairSet om = build_omega_gcd(inst);
  CHECK(om.size() == 5);
  const auto vm = valuation_measure(inst, om, 2);
  CHECK(vm.alpha == std::map<int, Rational>{{0, R(1, 3)}, {1, R(1, 3)}, {2, R(1, 3)}});
  CHECK(vm.beta == std::map<int, Rational>{{1, R(1)}});
  CHECK(vm.mu ==
        std::map<std::pair<int, int>, Rational>{{{0, 1}, R(1, 5)}, {{1, 1}, R(2, 5)}, {{2, 1}, R(2, 5)}});

  const auto coprime = GcdInstance::make(set_of({9, 15}), set_of({9, 15}), R(9), R(9), R(3));
  const auto vm2 = valuation_measure(coprime, build_omega_gcd(coprime), 2);
  CHECK(vm2.mu == std::map<std::pair<int, int>, Rational>{{{0, 0}, R(1)}});

  const auto sevens = GcdInstance::make(set_of({21, 28, 35}), set_of({21, 28, 35}), R(20), R(20), R(7));
  const auto vm3 = valuation_measure(sevens, build_omega_gcd(sevens), 7);
  CHECK(vm3.mu == std::map<std::pair<int, int>, Rational>{{{1, 1}, R(1)}});

  CHECK_THROWS_AS(valuation_measure(inst, PairSet{{}, 3, 2}, 2), InvalidInput);
  CHECK_THROWS_AS(valuation_measure(inst, om, 4), InvalidInput);
}

TEST_CASE("valuation measure sums are exactly one") {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const GcdInstance inst = random_structured_instance(rng);
    const PairSet om = build_omega_gcd(inst);
    if (om.empty()) continue;
    for (Prime p : prime_sets(inst).all) {
      const auto vm = valuation_measure(inst, om, p);
      Rational sa = 0, sb = 0, sm = 0;
      for (const auto& [k, v] : vm.alpha) sa += v;
      for (const auto& [k, v] : vm.beta) sb += v;
      for (const auto& [k, v] : vm.mu) {
        sm += v;
        CHECK(vm.alpha.count(k.first) == 1);
        CHECK(vm.beta.count(k.second) == 1);
      }
      CHECK(sa == 1);
      CHECK(sb == 1);
      CHECK(sm == 1);
    }
  }
}

TEST_CASE("pivotal examples") {
  CHECK(check_pivotal(F(12), F(18), F(6)));
  CHECK_FALSE(check_pivotal(F(4), F(9), F(6)));
  CHECK(check_pivotal(F(30), F(30), F(30)));
}

TEST_CASE("defect examples") {
  const auto d1 = defect(F(12), F(6));
  CHECK(d1.plus.value() == 2);
  CHECK(d1.minus.value() == 1);
  CHECK(d1.star.value() == 2);
  const auto d2 = defect(F(3), F(6));
  CHECK(d2.plus.value() == 1);
  CHECK(d2.minus.value() == 2);
  CHECK(d2.star.value() == 2);
  const auto d3 = defect(F(30), F(30));
  CHECK(d3.star.is_one());
  CHECK_THROWS_AS(defect(F(24), F(6)), InvalidDefect);
  CHECK_THROWS_AS(defect(F(24), F(6)), InvalidInput);
}

TEST_CASE("quad identity examples") {
  CHECK(quad_identity_check(F(12), F(18), F(6)));
  CHECK(quad_identity_check(F(30), F(30), F(30)));
  // sampled third case: 14 / 7 = 2, 21 / 7 = 3, a* b* = 6 = 14 * 21 / 7^2
  CHECK(check_pivotal(F(14), F(21), F(7)));
  CHECK(quad_identity_check(F(14), F(21), F(7)));
  const auto rows = quad_identity_table(F(14), F(21), F(7));
  CHECK(rows.size() == 3);
  CHECK(std::all_of(rows.begin(), rows.end(), [](const QuadRow& r) { return r.ok; }));
  CHECK_THROWS_AS(quad_identity_check(F(4), F(9), F(6)), InvalidInput);
  CHECK_THROWS_AS(quad_identity_table(F(4), F(9), F(6)), InvalidInput);
}

TEST_CASE("defect identity, round-trip and shape over sampled triples") {
  Rng rng(77);
  int pivotal = 0;
  const std::uint64_t primes[] = {2, 3, 5, 7, 11, 13};
  for (int i = 0; i < 10'000; ++i) {
    // N from small primes; a, b as N times +-1 steps at a few primes
    FactorMap nf;
    for (auto p : primes) {
      if (rng.chance(0.5)) nf[p] = static_cast<int>(rng.between(1, 3));
    }
    const FactoredNat n(nf);
    auto perturb = [&](FactoredNat base) {
      FactorMap f = base.factors();
      for (auto p : primes) {
        const auto r = rng.below(4);
        if (r == 0) ++f[p];
        if (r == 1 && f.count(p)) {
          if (--f[p] == 0) f.erase(p);
        }
        if (r == 2 && rng.chance(0.1)) f[p] += 2;
      }
      return FactoredNat(f);
    };
    const FactoredNat a = perturb(n), b = perturb(n);
    const auto au = a.to_u64(), bu = b.to_u64();
    const bool piv = check_pivotal(a, b, n);
    REQUIRE(au);
    REQUIRE(bu);
    CHECK(piv == pivotal_oracle(*au, *bu, std::map<std::uint64_t, int>(nf.begin(), nf.end())));
    if (!piv) continue;
    ++pivotal;
    const auto da = defect(a, n), db = defect(b, n);
    // per-prime form, recomputed here from raw valuations
    std::set<Prime> ps;
    for (const auto* x : {&a, &b, &n}) {
      for (const auto& [p, e] : x->factors()) ps.insert(p);
    }
    for (Prime p : ps) {
      const int va = a.valuation(p) - n.valuation(p);
      const int vb = b.valuation(p) - n.valuation(p);
      CHECK(da.star.valuation(p) + db.star.valuation(p) == std::abs(va - vb));
    }
    const std::uint64_t g = oracle::euclid(*au, *bu);
    CHECK(da.star.value() * db.star.value() == Natural(*au / g) * Natural(*bu / g));
    CHECK(quad_identity_check(a, b, n));
    CHECK(recover_element(da, n) == a);
    CHECK(recover_element(db, n) == b);
    CHECK(is_squarefree(da.plus));
    CHECK(is_squarefree(da.minus));
    CHECK(gcd(da.plus, da.minus).is_one());
    CHECK(da.star == da.plus * da.minus);
  }
  CHECK(pivotal > 1000);
}

TEST_CASE("find_modulus examples") {
  const auto twos = GcdInstance::make(set_of({2, 4}), set_of({2, 4}), R(2), R(2), R(2));
  const auto si = find_modulus(twos, build_omega_gcd(twos));
  CHECK(si.modulus.value() == 2);
  CHECK(si.omega_prime.size() == 3);
  CHECK(si.search == ModulusSearch::Exhaustive);
  CHECK(si.retained_fraction() == R(3, 4));

  const auto single = GcdInstance::make(set_of({360}), set_of({360}), R(360), R(360), R(7));
  const auto s1 = find_modulus(single, build_omega_gcd(single));
  CHECK(s1.modulus.value() == 360);
  CHECK(s1.omega_prime.size() == 1);

  // multiples of D = 10 in [50, 100]: cofactors 5..10 share little structure,
  // the best modulus keeps 9 of the 36 pairs
  const Family f = remark2_family(50, 50, 10);
  const auto inst = GcdInstance::make(f.a, f.b, R(50), R(50), R(10));
  const auto sr = find_modulus(inst, build_omega_gcd(inst));
  CHECK(sr.retained_fraction() == R(1, 4));
  CHECK(sr.modulus.valuation(2) >= 1);
  CHECK(sr.modulus.valuation(5) >= 1);
}

TEST_CASE("find_modulus is the lexicographically first optimum") {
  Rng rng(5);
  for (int round = 0; round < 60; ++round) {
    std::vector<std::uint64_t> a, b;
    const std::uint64_t x = static_cast<std::uint64_t>(rng.between(8, 200));
    for (int i = 0; i < 6; ++i)
      a.push_back(static_cast<std::uint64_t>(
          rng.between(static_cast<std::int64_t>(x), 2 * static_cast<std::int64_t>(x))));
    for (int i = 0; i < 6; ++i)
      b.push_back(static_cast<std::uint64_t>(
          rng.between(static_cast<std::int64_t>(x), 2 * static_cast<std::int64_t>(x))));
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    const auto inst =
        GcdInstance::make(set_of(a), set_of(b), R(static_cast<long>(x)), R(static_cast<long>(x)), R(2));
    const PairSet om = build_omega_gcd(inst);
    if (om.empty()) continue;

    // brute force over every exponent vector in the per-prime ranges
    std::vector<std::uint64_t> all = a;
    all.insert(all.end(), b.begin(), b.end());
    std::set<std::uint64_t> primes;
    for (auto v : all) {
      for (const auto& [p, e] : oracle::trial_factor(v)) primes.insert(p);
    }
    std::vector<std::uint64_t> plist(primes.begin(), primes.end());
    std::vector<int> lo, hi;
    for (auto p : plist) {
      int l = 1 << 20, h = 0;
      for (auto v : all) {
        l = std::min(l, oracle::repeated_division(p, v));
        h = std::max(h, oracle::repeated_division(p, v));
      }
      lo.push_back(l);
      hi.push_back(h);
    }
    std::size_t best = 0;
    std::map<std::uint64_t, int> best_n;
    std::vector<int> k = lo;
    bool first = true;
    for (;;) {
      std::map<std::uint64_t, int> n;
      for (std::size_t i = 0; i < plist.size(); ++i) {
        if (k[i]) n[plist[i]] = k[i];
      }
      std::size_t c = 0;
      for (const auto& [i, j] : om.edges) c += pivotal_oracle(a[i], b[j], n);
      if (first || c > best) {
        best = c;
        best_n = n;
        first = false;
      }
      // odometer, last prime fastest: lexicographic order
      bool done = true;
      for (std::size_t pos = plist.size(); pos-- > 0;) {
        if (k[pos] < hi[pos]) {
          ++k[pos];
          done = false;
          break;
        }
        k[pos] = lo[pos];
      }
      if (done) break;
    }
    const auto si = find_modulus(inst, om);
    CHECK(si.omega_prime.size() == best);
    CHECK(si.modulus.factors() == FactorMap(best_n.begin(), best_n.end()));
    for (const auto& e : om.edges) {
      CHECK(si.omega_prime.contains(e) == check_pivotal(inst.a()[e.first], inst.b()[e.second], si.modulus));
    }
  }
}

TEST_CASE("greedy modulus keeps the filter exact") {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const GcdInstance inst = random_structured_instance(rng);
    const PairSet om = build_omega_gcd(inst);
    if (om.empty()) continue;
    const auto si = find_modulus(inst, om, ModulusOptions{0});
    CHECK(si.search == ModulusSearch::Greedy);
    std::size_t c = 0;
    for (const auto& e : om.edges) {
      const bool piv = check_pivotal(inst.a()[e.first], inst.b()[e.second], si.modulus);
      CHECK(si.omega_prime.contains(e) == piv);
      c += piv;
    }
    CHECK(si.omega_prime.size() == c);
    CHECK(find_modulus(inst, om).omega_prime.size() >= si.omega_prime.size());
  }
}

TEST_CASE("defect census examples") {
  const auto c1 = defect_census(set_of({6}), F(6), R(6), R(1));
  CHECK(c1.count == 1);
  CHECK(c1.holds);
  // 12* = 2, 18* = 3, 30* = 5; no dyadic range holds all three
  const auto c2 = defect_census(set_of({12, 18}), F(6), R(12), R(3));
  CHECK(c2.count == 2);
  CHECK(c2.bound == 6);
  CHECK(c2.holds);
  CHECK(c2.ranges_hold);
  const auto c3 = defect_census(set_of({18, 30}), F(6), R(15), R(3));
  CHECK(c3.count == 1);
  CHECK(c3.holds);
  CHECK(c3.ranges_hold);
  CHECK_THROWS_AS(defect_census(set_of({12, 18, 24}), F(6), R(12), R(3)), InvalidDefect);
  CHECK_THROWS_AS(defect_census(set_of({12, 18, 30}), F(6), R(12), R(3)), InvalidInput);
}

TEST_CASE("defect census holds on structured sets") {
  Rng rng(31);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    const GcdInstance inst = random_structured_instance(rng);
    const PairSet om = build_omega_gcd(inst);
    if (om.empty()) continue;
    const auto si = find_modulus(inst, om);
    const auto deg = si.omega_prime.degrees_a();
    ElementSet s;
    for (std::size_t j = 0; j < deg.size(); ++j) {
      if (deg[j]) s.push_back(inst.a()[j]);
    }
    if (s.empty()) continue;
    ++checked;
    for (long t : {1, 2, 3, 5, 10, 30, 100, 1000, 100000}) {
      const auto c = defect_census(s, si.modulus, inst.x(), R(t));
      // count recomputed independently
      std::uint64_t ref = 0;
      for (const auto& a : s) ref += defect(a, si.modulus).star.value() <= t;
      CHECK(c.count == ref);
      CHECK(c.holds);
      CHECK(c.ranges_hold);
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("witness chain") {
  const Family f = remark2_family(100, 100, 10);
  const auto inst = GcdInstance::make(f.a, f.b, R(100), R(100), R(10));
  const auto si = find_modulus(inst, build_omega_gcd(inst));
  const auto w = extract_witnesses(si);
  CHECK(w.holds);
  CHECK(w.product <= w.bound);
  CHECK(w.bound == 1000 * R(100 * 100, 100) / (w.delta * w.delta));
  CHECK(si.omega_prime.contains(
      {static_cast<std::uint32_t>(w.a_index), static_cast<std::uint32_t>(w.b_index)}));
  CHECK(Rational(w.star_product) <= w.star_product_bound);
  CHECK(Rational(w.a_defect.star.value()) >= w.a_star_required);
  CHECK(Rational(w.b_defect.star.value()) >= w.b_star_required);
  CHECK(Rational(Natural(static_cast<unsigned long>(w.heavy_count))) >= w.heavy_required);
  CHECK(w.delta == 2 * w.delta_prime);

  // a single pair
  const auto one = GcdInstance::make(set_of({12}), set_of({18}), R(12), R(18), R(6));
  const auto s1 = find_modulus(one, build_omega_gcd(one));
  CHECK(s1.omega_prime.size() == 1);
  const auto w1 = extract_witnesses(s1);
  CHECK(w1.a.value() == 12);
  CHECK(w1.b.value() == 18);
  CHECK(w1.holds);

  const auto rel = GcdInstance::relaxed(set_of({2, 30}), set_of({2, 30}), R(2));
  CHECK_THROWS_AS(extract_witnesses(find_modulus(rel, build_omega_gcd(rel))), InvalidInput);
  StructuredInstance empty = s1;
  empty.omega_prime.edges.clear();
  CHECK_THROWS_AS(extract_witnesses(empty), InvalidInput);
}

TEST_CASE("witness chain holds on structured instances") {
  Rng rng(99);
  for (int i = 0; i < 500; ++i) {
    const auto out = check_structured(random_structured_instance(rng));
    CHECK(out.violations.empty());
  }
}
