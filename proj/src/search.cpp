#include "gcdlab/search.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "gcdlab/errors.hpp"
#include "gcdlab/families.hpp"
#include "gcdlab/structure.hpp"

namespace gcdlab {

namespace {

using Mask = std::uint64_t;

int popc(Mask m) { return std::popcount(m); }

std::vector<std::uint64_t> members(Mask m, std::uint64_t base) {
  std::vector<std::uint64_t> out;
  for (; m; m &= m - 1) out.push_back(base + static_cast<std::uint64_t>(std::countr_zero(m)));
  return out;
}

struct Graph {
  std::size_t n = 0, m = 0;
  std::vector<Mask> left;   // left[i]: right neighbours of X + i
  std::vector<Mask> right;  // right[j]: left neighbours of Y + j
};

Graph compatibility(const SearchSpace& s) {
  Graph g;
  g.n = s.x + 1;
  g.m = s.y + 1;
  g.left.assign(g.n, 0);
  g.right.assign(g.m, 0);
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = 0; j < g.m; ++j) {
      if (std::gcd(s.x + i, s.y + j) >= s.d) {
        g.left[i] |= Mask{1} << j;
        g.right[j] |= Mask{1} << i;
      }
    }
  }
  return g;
}

struct Best {
  std::uint64_t product = 0;
  Mask a = 0;
  Mask b = 0;
};

// Lexicographic order on the ascending member lists of two masks.
bool lex_less(Mask x, Mask y) {
  while (x && y) {
    const int cx = std::countr_zero(x), cy = std::countr_zero(y);
    if (cx != cy) return cx < cy;
    x &= x - 1;
    y &= y - 1;
  }
  return !x && y;
}

void offer(Best& best, std::uint64_t product, Mask a, Mask b) {
  if (product > best.product || (product == best.product && product > 0 &&
                                 (lex_less(a, best.a) || (a == best.a && lex_less(b, best.b))))) {
    best = {product, a, b};
  }
}

struct BicliqueSearch {
  const Graph& g;
  Best best;
  std::uint64_t nodes = 0;

  void run(std::size_t i, Mask chosen, Mask common) {
    ++nodes;
    const auto size = static_cast<std::uint64_t>(popc(chosen));
    const auto width = static_cast<std::uint64_t>(popc(common));
    if (size > 0 && size * width > best.product) best = {size * width, chosen, common};
    if (i == g.n) return;
    if ((size + (g.n - i)) * width <= best.product) return;
    const Mask inc = common & g.left[i];
    if (inc) run(i + 1, chosen | (Mask{1} << i), inc);
    run(i + 1, chosen, common);
  }
};

struct CliqueSearch {
  const Graph& g;
  std::uint64_t cap = 0;  // 0: no cap
  Mask best = 0;
  int best_size = 0;
  std::uint64_t nodes = 0;
  bool done = false;

  void run(Mask chosen, int size, Mask cand) {
    ++nodes;
    if (size > best_size) {
      best_size = size;
      best = chosen;
      if (cap && static_cast<std::uint64_t>(size) >= cap) done = true;
    }
    if (done || size + popc(cand) <= best_size) return;
    for (Mask c = cand; c; c &= c - 1) {
      const int j = std::countr_zero(c);
      const Mask above = ~((Mask{2} << j) - 1);
      run(chosen | (Mask{1} << j), size + 1, cand & g.left[j] & above);
      if (done || size + popc(c) - 1 <= best_size) return;
    }
  }
};

// Best B for a fixed A under the threshold predicate.
struct ThresholdEval {
  const Graph& g;
  Natural num, den;  // delta_target

  std::pair<std::uint64_t, Mask> best_b(Mask a) const {
    const auto na = static_cast<std::uint64_t>(popc(a));
    if (na == 0) return {0, 0};
    std::vector<std::pair<int, std::size_t>> deg(g.m);
    for (std::size_t j = 0; j < g.m; ++j) deg[j] = {popc(g.right[j] & a), j};
    std::stable_sort(deg.begin(), deg.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
    std::uint64_t best = 0, sum = 0;
    Mask bm = 0, cur = 0;
    for (std::size_t k = 1; k <= g.m; ++k) {
      sum += static_cast<std::uint64_t>(deg[k - 1].first);
      cur |= Mask{1} << deg[k - 1].second;
      // sum >= delta |A| k
      if (Natural(static_cast<unsigned long>(sum)) * den >= num * static_cast<unsigned long>(na * k) &&
          na * k > best) {
        best = na * k;
        bm = cur;
      }
    }
    return {best, bm};
  }
};

std::uint64_t good_pairs(const Graph& g, Mask a, Mask b) {
  std::uint64_t c = 0;
  for (Mask r = a; r; r &= r - 1) c += static_cast<std::uint64_t>(popc(g.left[std::countr_zero(r)] & b));
  return c;
}

std::string describe(const GcdInstance& inst) {
  return "X=" + format_rational(inst.x()) + " Y=" + format_rational(inst.y()) +
         " D=" + format_rational(inst.d()) + " |A|=" + std::to_string(inst.a().size()) +
         " |B|=" + std::to_string(inst.b().size());
}

void census_side(const ElementSet& side, const std::vector<std::uint32_t>& degree, const FactoredNat& modulus,
                 const Rational& x, const std::string& label, const std::string& where,
                 std::vector<Violation>& out) {
  ElementSet s;
  Natural largest = 1;
  for (std::size_t i = 0; i < side.size(); ++i) {
    if (degree[i] == 0) continue;
    s.push_back(side[i]);
    const Natural star = defect(side[i], modulus).star.value();
    if (star > largest) largest = star;
  }
  if (s.empty()) return;
  for (Natural t = 1;; t *= 2) {
    const auto c = defect_census(s, modulus, x, Rational(t));
    if (!c.holds) {
      out.push_back(
          {"defect_census", where,
           label + ": " + std::to_string(c.count) + " elements with a* <= " + t.get_str() + " > 2T"});
    }
    if (!c.ranges_hold) {
      out.push_back(
          {"defect_ranges", where,
           label + ": " + std::to_string(c.range_failures) + " range failures at T = " + t.get_str()});
    }
    if (t > largest) break;
  }
}

}  // namespace

SearchResult exhaustive_max(const SearchSpace& space, std::uint64_t seed) {
  if (space.d == 0) throw InvalidInput("search: D must be >= 1");
  if (space.x == 0 || space.y == 0) throw InvalidInput("search: X and Y must be >= 1");
  const std::uint64_t cap = std::min<std::uint64_t>(space.limit, 64);
  if (space.x + 1 > cap || space.y + 1 > cap) {
    throw InvalidInput("search: universe too large (" + std::to_string(std::max(space.x, space.y) + 1) +
                       " integers per side, limit " + std::to_string(cap) + ")");
  }
  if (space.delta_target <= 0 || space.delta_target > 1) {
    throw InvalidInput("search: delta target must lie in (0, 1]");
  }
  if (space.symmetric && space.x != space.y) throw InvalidInput("search: symmetric search needs X = Y");
  if (space.symmetric && space.mode != SearchMode::ExactDeltaOne) {
    throw InvalidInput("search: symmetric search only in exact delta = 1 mode");
  }

  const Graph g = compatibility(space);
  SearchResult r;

  if (space.symmetric) {
    // A = B: a clique in the compatibility graph. gcd(a, a) = a, so elements
    // below D are excluded outright.
    CliqueSearch cs{g, 0, 0, 0, 0, false};
    if (space.chase_prune) cs.cap = space.x / space.d + 1;
    Mask all = 0;
    for (std::size_t i = 0; i < g.n; ++i) {
      if (g.left[i] >> i & 1) all |= Mask{1} << i;
    }
    cs.run(0, 0, all);
    r.best_a = r.best_b = members(cs.best, space.x);
    r.max_product = static_cast<std::uint64_t>(cs.best_size) * static_cast<std::uint64_t>(cs.best_size);
    r.good_pairs = good_pairs(g, cs.best, cs.best);
    r.nodes = cs.nodes;
    return r;
  }

  if (space.mode == SearchMode::ExactDeltaOne || space.delta_target == 1) {
    BicliqueSearch bs{g, {}, 0};
    const Mask all_right = g.m == 64 ? ~Mask{0} : (Mask{1} << g.m) - 1;
    bs.run(0, 0, all_right);
    r.best_a = members(bs.best.a, space.x);
    r.best_b = members(bs.best.b, space.y);
    r.max_product = bs.best.product;
    r.good_pairs = good_pairs(g, bs.best.a, bs.best.b);
    r.nodes = bs.nodes;
    return r;
  }

  ThresholdEval ev{g, space.delta_target.get_num(), space.delta_target.get_den()};
  Best best;
  if (g.n <= kThresholdExactLimit && g.m <= kThresholdExactLimit) {
    for (Mask a = 1; a < (Mask{1} << g.n); ++a) {
      ++r.nodes;
      const auto [p, b] = ev.best_b(a);
      offer(best, p, a, b);
    }
  } else {
    r.exact = false;
    Rng rng(seed);
    const Mask full = g.n == 64 ? ~Mask{0} : (Mask{1} << g.n) - 1;
    for (int restart = 0; restart < 64; ++restart) {
      Mask a = rng.next() & full;
      if (!a) a = Mask{1} << rng.below(g.n);
      auto cur = ev.best_b(a);
      for (bool improved = true; improved;) {
        improved = false;
        for (std::size_t i = 0; i < g.n; ++i) {
          const Mask t = a ^ (Mask{1} << i);
          if (!t) continue;
          ++r.nodes;
          const auto cand = ev.best_b(t);
          if (cand.first > cur.first) {
            a = t;
            cur = cand;
            improved = true;
          }
        }
      }
      offer(best, cur.first, a, cur.second);
    }
  }
  r.best_a = members(best.a, space.x);
  r.best_b = members(best.b, space.y);
  r.max_product = best.product;
  r.good_pairs = good_pairs(g, best.a, best.b);
  return r;
}

StructuredOutcome check_structured(const GcdInstance& inst) {
  StructuredOutcome out;
  const PairSet omega = build_omega_gcd(inst);
  if (omega.empty()) return out;
  const StructuredInstance si = find_modulus(inst, omega);
  if (si.omega_prime.empty()) return out;
  out.checked = true;
  const std::string where = describe(inst) + " N=" + si.modulus.str();
  try {
    const WitnessReport w = extract_witnesses(si);
    if (!w.holds) {
      out.violations.push_back({"witness_bound", where,
                                "|A||B| = " + format_rational(w.product) + " > " + format_rational(w.bound)});
    }
  } catch (const ConsistencyFailure& e) {
    out.violations.push_back({"witness_chain", where, e.what()});
  }
  try {
    census_side(inst.a(), si.omega_prime.degrees_a(), si.modulus, inst.x(), "A", where, out.violations);
    census_side(inst.b(), si.omega_prime.degrees_b(), si.modulus, inst.y(), "B", where, out.violations);
  } catch (const InvalidDefect& e) {
    out.violations.push_back({"defect_invalid", where, e.what()});
  }
  return out;
}

GcdInstance random_structured_instance(Rng& rng) {
  // D, occasionally a half-integer; hub divisors >= D whose multiples make
  // the gcd graph dense.
  const std::uint64_t dn = static_cast<std::uint64_t>(rng.between(1, 300));
  const bool half = dn > 1 && rng.chance(0.1);
  const Rational d =
      half ? Rational(Natural(static_cast<unsigned long>(2 * dn - 1)), 2) : Rational(Natural(dn));
  const std::uint64_t dc = dn;  // ceil(D)
  const auto x = static_cast<std::uint64_t>(rng.between(static_cast<std::int64_t>(dc), 20000));
  const auto y =
      rng.chance(0.3) ? x : static_cast<std::uint64_t>(rng.between(static_cast<std::int64_t>(dc), 20000));
  const std::uint64_t lo = std::min(x, y);

  std::vector<std::uint64_t> hubs(static_cast<std::size_t>(rng.between(1, 3)));
  for (auto& h : hubs) {
    h = rng.chance(0.5)
            ? dc
            : static_cast<std::uint64_t>(rng.between(static_cast<std::int64_t>(dc),
                                                     static_cast<std::int64_t>(std::min(lo, 4 * dc))));
  }
  auto fill = [&](std::uint64_t base) {
    std::vector<std::uint64_t> v(static_cast<std::size_t>(rng.between(1, 24)));
    for (auto& e : v) {
      if (rng.chance(0.85)) {
        const std::uint64_t h = hubs[rng.below(hubs.size())];
        const std::uint64_t first = (base + h - 1) / h;
        const std::uint64_t last = 2 * base / h;
        e = h * static_cast<std::uint64_t>(
                    rng.between(static_cast<std::int64_t>(first), static_cast<std::int64_t>(last)));
      } else {
        e = static_cast<std::uint64_t>(
            rng.between(static_cast<std::int64_t>(base), static_cast<std::int64_t>(2 * base)));
      }
    }
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return make_element_set(v);
  };
  ElementSet a = fill(x);
  ElementSet b = fill(y);
  return GcdInstance::make(std::move(a), std::move(b), Rational(Natural(x)), Rational(Natural(y)), d);
}

HuntSummary hunt_violations(std::uint64_t scale_limit, std::uint64_t seed, std::uint64_t structured) {
  HuntSummary h;

  for (std::uint64_t x = 1; x <= scale_limit; ++x) {
    for (std::uint64_t d = 1; d <= x; ++d) {
      SearchSpace s;
      s.x = s.y = x;
      s.d = d;
      s.symmetric = true;
      s.chase_prune = false;
      s.limit = std::max<std::uint64_t>(20, x + 1);
      const auto r = exhaustive_max(s);
      ++h.diagonal_cases;
      const std::uint64_t cap = x / d + 1;
      if (r.best_a.size() > cap) {
        h.violations.push_back({"diagonal", "X=" + std::to_string(x) + " D=" + std::to_string(d),
                                "|A| = " + std::to_string(r.best_a.size()) + " > " + std::to_string(cap)});
      }
    }
  }

  Rng rng(seed);
  for (std::uint64_t i = 0; i < structured; ++i) {
    const GcdInstance inst = random_structured_instance(rng);
    auto o = check_structured(inst);
    ++h.structured_cases;
    if (!o.checked) ++h.structured_skipped;
    for (auto& v : o.violations) h.violations.push_back(std::move(v));
  }

  for (std::uint64_t x : {8u, 12u, 20u, 30u, 50u, 100u}) {
    for (std::uint64_t y : {8u, 20u, 50u}) {
      for (std::uint64_t d : {1u, 2u, 3u, 5u, 7u}) {
        if (d > std::min(x, y)) continue;
        Family f = remark2_family(x, y, d);
        ++h.remark2_cases;
        const std::string where =
            "remark2 X=" + std::to_string(x) + " Y=" + std::to_string(y) + " D=" + std::to_string(d);
        for (const auto& c : f.report.checks) {
          if (!c.passed) h.violations.push_back({"remark2_" + c.name, where, c.detail});
        }
        const GcdInstance inst = GcdInstance::make(f.a, f.b, Rational(Natural(static_cast<unsigned long>(x))),
                                                   Rational(Natural(static_cast<unsigned long>(y))),
                                                   Rational(Natural(static_cast<unsigned long>(d))));
        for (auto& v : check_structured(inst).violations) h.violations.push_back(std::move(v));
      }
    }
  }
  return h;
}

}  // namespace gcdlab
