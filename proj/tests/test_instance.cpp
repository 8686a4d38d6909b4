#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "gcdlab/errors.hpp"
#include "gcdlab/instance.hpp"
#include "gcdlab/random.hpp"
#include "oracles.hpp"

using namespace gcdlab;

namespace {

ElementSet set_of(std::vector<std::uint64_t> v) { return make_element_set(v); }
Rational R(long n, long d = 1) { return Rational(n, d); }

std::vector<std::uint64_t> random_values(Rng& rng, std::size_t max_size, std::int64_t max_value) {
  std::vector<std::uint64_t> v(static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(max_size))));
  for (auto& x : v) x = static_cast<std::uint64_t>(rng.between(1, max_value));
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

TEST_CASE("instance validation names the field") {
  CHECK_NOTHROW(GcdInstance::make(set_of({4, 6, 8}), set_of({4, 6, 8}), R(4), R(4), R(2)));
  try {
    GcdInstance::make(set_of({4, 6, 9}), set_of({4}), R(4), R(4), R(2));
    FAIL("expected InvalidInput");
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("field 'A[2]'") != std::string::npos);
  }
  CHECK_THROWS_AS(GcdInstance::make(set_of({4}), set_of({4}), R(4), R(4), R(5)), InvalidInput);
  CHECK_THROWS_AS(GcdInstance::make({}, set_of({4}), R(4), R(4), R(2)), InvalidInput);
  CHECK_THROWS_AS(GcdInstance::make(set_of({4}), set_of({4}), R(4), R(4), R(2), Params{R(1), 100}),
                  InvalidInput);
  CHECK_THROWS_AS(GcdInstance::make(set_of({4}), set_of({4}), R(4), R(4), R(0)), InvalidInput);
  CHECK_THROWS_AS(GcdInstance::infer_ranges(set_of({4, 9}), set_of({4}), R(2)), InvalidInput);
  const auto inf = GcdInstance::infer_ranges(set_of({5, 9}), set_of({7, 14}), R(2));
  CHECK(inf.x() == 5);
  CHECK(inf.y() == 7);
  const auto inst = GcdInstance::make(set_of({4}), set_of({4}), R(4), R(4), R(2));
  CHECK(inst.q() == R(5, 2));
  CHECK(inst.q_prime() == R(5, 3));
}

TEST_CASE("pair set examples") {
  const auto relaxed = GcdInstance::relaxed(set_of({1, 2, 3, 4}), set_of({1, 2, 3, 4}), R(2));
  const PairSet om = build_omega_gcd(relaxed);
  // indices: 1 -> 0, 2 -> 1, 3 -> 2, 4 -> 3
  CHECK(om.edges == std::vector<PairSet::Edge>{{1, 1}, {1, 3}, {2, 2}, {3, 1}, {3, 3}});
  CHECK(om.delta() == R(5, 16));

  const auto all = GcdInstance::make(set_of({4, 6, 8}), set_of({4, 6, 8}), R(4), R(4), R(1));
  CHECK(build_omega_gcd(all).delta() == 1);
  const auto even = GcdInstance::make(set_of({4, 6, 8}), set_of({4, 6, 8}), R(4), R(4), R(2));
  CHECK(build_omega_gcd(even).size() == 9);
  CHECK(build_omega_gcd(even).delta() == 1);
  CHECK(build_omega_gcd(even).degrees_a() == std::vector<std::uint32_t>{3, 3, 3});
}

TEST_CASE("census examples") {
  CHECK(count_pairs_geq_fast(set_of({1, 2, 3, 4}), set_of({1, 2, 3, 4}), R(2)) == 5);
  CHECK(count_pairs_geq_fast(set_of({6, 12}), set_of({9, 18}), R(3)) == 4);
  CHECK(count_pairs_geq_fast(set_of({6, 12}), set_of({9, 18}), R(25)) == 0);
  CHECK(count_pairs_geq_naive(set_of({6, 12}), set_of({9, 18}), R(3)) == 4);
  // non-integral D compares against ceil(D)
  CHECK(count_pairs_geq_fast(set_of({6, 12}), set_of({9, 18}), R(5, 2)) == 4);
  CHECK(count_pairs_geq_fast(set_of({6, 12}), set_of({9, 18}), R(7, 2)) == 2);
}

TEST_CASE("fast census equals naive and the oracle on seeded instances") {
  Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_values(rng, 64, 1'000'000);
    const auto b = random_values(rng, 64, 1'000'000);
    const std::uint64_t d = std::array<std::uint64_t, 5>{1, 2, 5, 17, 1000}[rng.below(5)];
    const auto sa = set_of(a), sb = set_of(b);
    const std::uint64_t fast = count_pairs_geq_fast(sa, sb, R(static_cast<long>(d)));
    CHECK(fast == count_pairs_geq_naive(sa, sb, R(static_cast<long>(d))));
    CHECK(fast == oracle::pair_count(a, b, d));
  }
  // elements beyond 32 bits take the generic path
  const std::vector<std::uint64_t> big{5'000'000'000ULL, 10'000'000'000ULL, 7'000'000'007ULL};
  CHECK(count_pairs_geq_naive(set_of(big), set_of(big), R(1000)) == oracle::pair_count(big, big, 1000));
  CHECK(count_pairs_geq_fast(set_of(big), set_of(big), R(1000)) == oracle::pair_count(big, big, 1000));
}

TEST_CASE("delta is non-increasing in D") {
  Rng rng(9);
  for (int i = 0; i < 30; ++i) {
    const auto a = set_of(random_values(rng, 30, 5000));
    const auto b = set_of(random_values(rng, 30, 5000));
    Rational prev = 2;
    for (long d = 1; d <= 60; ++d) {
      const Rational delta = build_omega_gcd(a, b, R(d)).delta();
      CHECK(delta <= prev);
      prev = delta;
    }
  }
}

TEST_CASE("density law for multiples of k") {
  // A = B = multiples of k in [X, 2X] with X / k >= 1000: the share of pairs
  // with gcd >= mk is at least 1 / (2m) for m <= 10.
  for (std::uint64_t k : {1, 3, 7}) {
    const std::uint64_t x = 1000 * k;
    std::vector<std::uint64_t> v;
    for (std::uint64_t a = x; a <= 2 * x; a += k) v.push_back(a);
    const auto s = set_of(v);
    const Rational pairs = R(static_cast<long>(v.size() * v.size()));
    for (long m = 1; m <= 10; ++m) {
      const auto good = count_pairs_geq_fast(s, s, R(m * static_cast<long>(k)));
      CHECK(Rational(Natural(static_cast<unsigned long>(good))) / pairs >= R(1, 2 * m));
    }
  }
}

TEST_CASE("prime sets") {
  const auto ps = prime_sets(set_of({12, 35}), 5);
  CHECK(ps.all == std::set<Prime>{2, 3, 5, 7});
  CHECK(ps.small == std::set<Prime>{2, 3, 5});
  CHECK(prime_sets(set_of({1}), 100).all.empty());
  const auto pow2 = prime_sets(set_of({1024}), 2);
  CHECK(pow2.all == std::set<Prime>{2});
  CHECK(pow2.small == std::set<Prime>{2});

  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto s = set_of(random_values(rng, 20, 100000));
    std::size_t prev = 0;
    for (std::uint64_t p0 : {2, 3, 10, 50, 100, 1000}) {
      const auto q = prime_sets(s, p0);
      CHECK(std::includes(q.all.begin(), q.all.end(), q.small.begin(), q.small.end()));
      CHECK(q.small.size() >= prev);
      prev = q.small.size();
    }
  }
}

TEST_CASE("main bound examples") {
  const auto unit = GcdInstance::make(set_of({1}), set_of({1}), R(1), R(1), R(1));
  CHECK(theorem1_bound(unit, R(1)).bound == doctest::Approx(1000.0));
  CHECK(theorem1_bound(unit, R(1)).holds);

  const auto two_three = GcdInstance::make(set_of({12}), set_of({18}), R(10), R(10), R(5));
  CHECK(prime_sets(two_three).small == std::set<Prime>{2, 3});
  CHECK(theorem1_bound(two_three, R(1)).bound == doctest::Approx(4e9));

  CHECK(theorem1_bound(unit, R(1, 2)).bound == doctest::Approx(1000.0 * std::pow(2.0, 2.5)));
  CHECK(theorem1_bound(unit, R(1, 2)).bound == doctest::Approx(5656.85).epsilon(1e-6));
  CHECK_THROWS_AS(theorem1_bound(unit, R(0)), InvalidInput);
}

TEST_CASE("diagonal bound") {
  const auto c1 = chase_diagonal_bound(set_of({4, 6, 8}), R(4), R(2));
  CHECK(c1.holds);
  CHECK(c1.max_allowed == 3);
  CHECK(*c1.min_gap == 2);

  const auto c2 = chase_diagonal_bound(set_of({21}), R(20), R(7));
  CHECK(c2.holds);
  CHECK(c2.max_allowed == 20 / 7 + 1);

  // 15 lies outside [6, 12], so this set is not a valid input at X = 6
  CHECK_THROWS_AS(chase_diagonal_bound(set_of({6, 10, 15}), R(6), R(2)), InvalidInput);
  const auto c3 = chase_diagonal_bound(set_of({8, 10, 12, 14, 16}), R(8), R(2));
  CHECK(c3.holds);
  CHECK(c3.max_allowed == 5);

  CHECK_THROWS_AS(chase_diagonal_bound(set_of({4, 5}), R(4), R(2)), InvalidInput);
}

TEST_CASE("squarefree bound examples") {
  const auto s1 = theorem51_bound(set_of({2}), set_of({2}), R(1), R(1, 2), 100);
  CHECK(s1.delta == 1);
  CHECK(s1.holds);
  const auto s2 = theorem51_bound(set_of({2, 3, 6}), set_of({2, 3, 6}), R(6), R(1, 2), 100);
  CHECK(s2.delta == 1);
  const auto s3 = theorem51_bound(set_of({30}), set_of({77}), R(100), R(1, 2), 100);
  CHECK(s3.delta == 0);
  CHECK_FALSE(s3.bound.has_value());
  CHECK_THROWS_AS(theorem51_bound(set_of({4}), set_of({2}), R(6), R(1, 2), 100), InvalidInput);

  const PairSet om = build_omega_ratio(set_of({2, 3, 6}), set_of({2, 3, 6}), R(2));
  std::size_t ref = 0;
  for (std::uint64_t a : {2, 3, 6}) {
    for (std::uint64_t b : {2, 3, 6}) ref += oracle::ratio(a, b) <= 2;
  }
  CHECK(om.size() == ref);
}

TEST_CASE("instance files round-trip and reject bad input") {
  const auto inst =
      GcdInstance::make(set_of({4, 6, 8}), set_of({10, 15}), R(4), R(10), R(5, 2), Params{R(1, 4), 50});
  const std::string text = write_instance(inst);
  const auto back = read_instance(text);
  CHECK(write_instance(back) == text);
  CHECK(back.d() == R(5, 2));
  CHECK(back.p0() == 50);

  const auto rel = GcdInstance::relaxed(set_of({1, 2, 30}), set_of({1, 2, 30}), R(1));
  const std::string rtext = write_instance(rel);
  CHECK(rtext.find("\"relaxed\": true") != std::string::npos);
  CHECK(write_instance(read_instance(rtext)) == rtext);
  CHECK_FALSE(read_instance(rtext).dyadic());

  // X, Y omitted: inferred
  const auto inferred = read_instance(R"({"A": ["5", "9"], "B": ["7"], "D": "2"})");
  CHECK(inferred.x() == 5);
  CHECK(inferred.epsilon() == R(1, 2));
  CHECK(inferred.p0() == 100);

  CHECK_THROWS_AS(read_instance("{"), InvalidInput);
  CHECK_THROWS_AS(read_instance(R"({"A": ["4"], "B": ["4"], "D": "2", "Z": 1})"), InvalidInput);
  CHECK_THROWS_AS(read_instance(R"({"A": ["4"], "B": ["4"], "D": "2", "X": "4"})"), InvalidInput);
  CHECK_THROWS_AS(read_instance(R"({"A": [4], "B": ["4"], "D": "2"})"), InvalidInput);
  CHECK_THROWS_AS(read_instance(R"({"A": ["4"], "B": ["4"], "D": "2", "X": "4", "Y": "4", "relaxed": true})"),
                  InvalidInput);
  try {
    read_instance(R"({"A": ["4", "x"], "B": ["4"], "D": "2"})");
    FAIL("expected InvalidInput");
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("field 'A[1]'") != std::string::npos);
  }
  CHECK_THROWS_AS(load_instance_file("/nonexistent/instance.json"), InvalidInput);
}
