#include "gcdlab/families.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gcdlab/errors.hpp"

namespace gcdlab {

namespace {

std::string u64s(std::uint64_t v) { return std::to_string(v); }

Rational as_rational(std::size_t n) { return Rational(Natural(static_cast<unsigned long>(n))); }

ElementSet multiples_in(std::uint64_t lo, std::uint64_t hi, std::uint64_t step) {
  std::vector<std::uint64_t> v;
  for (std::uint64_t m = (lo + step - 1) / step * step; m <= hi; m += step) v.push_back(m);
  return make_element_set(v);
}

}  // namespace

bool FamilyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const FamilyCheck& c) { return c.passed; });
}

Family remark2_family(std::uint64_t x, std::uint64_t y, std::uint64_t d) {
  if (d == 0) throw InvalidInput("remark2: D must be >= 1");
  if (d > std::min(x, y)) throw InvalidInput("remark2: D must not exceed min(X, Y)");
  Family f;
  f.a = multiples_in(x, 2 * x, d);
  f.b = multiples_in(y, 2 * y, d);
  auto& r = f.report;
  r.family = "remark2";
  r.parameters = {{"X", u64s(x)}, {"Y", u64s(y)}, {"D", u64s(d)}};
  r.size_a = f.a.size();
  r.size_b = f.b.size();
  const std::uint64_t good = count_pairs_geq_fast(f.a, f.b, Rational(Natural(static_cast<unsigned long>(d))));
  r.measured_delta = Rational(Natural(static_cast<unsigned long>(good)),
                              Natural(static_cast<unsigned long>(r.size_a * r.size_b)));
  r.measured_delta.canonicalize();
  r.extremal_ratio = static_cast<double>(r.size_a) * static_cast<double>(r.size_b) * static_cast<double>(d) *
                     static_cast<double>(d) / (static_cast<double>(x) * static_cast<double>(y));
  r.checks.push_back({"delta_is_one", r.measured_delta == 1, "delta = " + format_rational(r.measured_delta)});
  auto size_check = [&](const char* name, std::size_t size, std::uint64_t range) {
    const std::uint64_t scaled = size * d;
    const bool ok = scaled + d >= range && scaled <= range + d;
    r.checks.push_back({name, ok, "|set| D = " + u64s(scaled) + ", range " + u64s(range)});
  };
  size_check("size_a_near_X_over_D", r.size_a, x);
  size_check("size_b_near_Y_over_D", r.size_b, y);
  return f;
}

Family remark3_family(std::uint64_t x, std::uint64_t d, const Rational& delta) {
  if (delta <= 0 || delta > 1) throw InvalidInput("remark3: delta must lie in (0, 1]");
  if (Rational(Natural(static_cast<unsigned long>(d))) * delta < 1) {
    throw InvalidInput("remark3: need D >= 1 / delta");
  }
  const Natural d0n = floor_natural(Rational(Natural(static_cast<unsigned long>(d))) * delta);
  const std::uint64_t d0 = d0n.get_ui();
  if (d0 > x) throw InvalidInput("remark3: floor(delta D) exceeds X");
  Family f;
  f.a = multiples_in(x, 2 * x, d0);
  f.b = f.a;
  auto& r = f.report;
  r.family = "remark3";
  r.parameters = {{"X", u64s(x)}, {"D", u64s(d)}, {"delta", format_rational(delta)}, {"D0", u64s(d0)}};
  r.size_a = r.size_b = f.a.size();
  const Rational dr(Natural(static_cast<unsigned long>(d)));
  const std::uint64_t good = count_pairs_geq_fast(f.a, f.b, dr);
  const Rational pairs = as_rational(r.size_a) * as_rational(r.size_b);
  r.measured_delta = Rational(Natural(static_cast<unsigned long>(good))) / pairs;
  // |A||B| against delta^{-2} X^2 / D^2
  const Rational xr(Natural(static_cast<unsigned long>(x)));
  r.extremal_ratio = Rational(pairs * delta * delta * dr * dr / (xr * xr)).get_d();
  r.checks.push_back({"d0_is_floor_delta_d", d0n == floor_natural(dr * delta), "D0 = " + u64s(d0)});
  if (r.size_a <= 4096) {
    const std::uint64_t naive = count_pairs_geq_naive(f.a, f.b, dr);
    r.checks.push_back(
        {"census_paths_agree", naive == good, "fast " + u64s(good) + ", naive " + u64s(naive)});
  }
  return f;
}

std::vector<std::uint64_t> squarefree_up_to(std::uint64_t n) {
  std::vector<bool> sq(n + 1, true);
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    for (std::uint64_t m = p * p; m <= n; m += p * p) sq[m] = false;
  }
  std::vector<std::uint64_t> out;
  for (std::uint64_t v = 1; v <= n; ++v) {
    if (sq[v]) out.push_back(v);
  }
  return out;
}

Sec5Family sec5_family(std::uint64_t x) {
  if (x < 2) throw InvalidInput("sec5: X must be >= 2");
  const FactoredNat prim = primorial(x);
  const auto sqf = squarefree_up_to(x);

  Sec5Family out;
  std::set<Natural> seen;
  bool integral = true;
  for (std::uint64_t n : sqf) {
    const FactoredNat nf = factorize(n);
    for (std::uint64_t m : sqf) {
      if (m * n > x) break;
      if (std::gcd(m, n) != 1) continue;
      const FactoredNat mf = factorize(m);
      FactorMap f = prim.factors();
      for (const auto& [p, e] : mf.factors()) f[p] += e;
      for (const auto& [p, e] : nf.factors()) {
        f[p] -= e;
        if (f[p] == 0) f.erase(p);
      }
      FactoredNat a(std::move(f));
      if (a.value() * nf.value() != prim.value() * mf.value()) integral = false;
      if (!seen.insert(a.value()).second) {
        throw ConsistencyFailure("sec5: value " + a.str() + " produced twice");
      }
      out.a.push_back(std::move(a));
    }
  }
  std::sort(out.a.begin(), out.a.end());

  const Natural limit = Natural(static_cast<unsigned long>(x)) * static_cast<unsigned long>(x);
  out.max_ratio = 0;
  for (std::size_t i = 0; i < out.a.size(); ++i) {
    for (std::size_t j = i; j < out.a.size(); ++j) {
      Natural r = coprime_ratio(out.a[i], out.a[j]).value();
      if (r > out.max_ratio) out.max_ratio = r;
    }
  }
  const bool all_squarefree =
      std::all_of(out.a.begin(), out.a.end(), [](const FactoredNat& v) { return is_squarefree(v); });

  auto& r = out.report;
  r.family = "sec5";
  r.parameters = {{"X", u64s(x)}, {"primorial", prim.str()}};
  r.size_a = r.size_b = out.a.size();
  r.measured_delta = 1;
  r.extremal_ratio = static_cast<double>(out.a.size()) / static_cast<double>(x);
  out.growth_constant =
      static_cast<double>(out.a.size()) / (static_cast<double>(x) * std::log(static_cast<double>(x)));
  r.checks.push_back({"integral", integral, "P m / n integral for every pair (m, n)"});
  r.checks.push_back({"pair_ratio_at_most_X_squared", out.max_ratio <= limit,
                      "max ratio " + out.max_ratio.get_str() + ", X^2 = " + limit.get_str()});
  r.checks.push_back(
      {"size_at_least_X", out.a.size() >= x, "|A| = " + u64s(out.a.size()) + ", X = " + u64s(x)});
  if (x >= 3) {
    r.checks.push_back({"not_all_squarefree", !all_squarefree,
                        all_squarefree ? "every element squarefree" : "contains a non-squarefree element"});
  }
  return out;
}

Family squarefree_instance(std::uint64_t n, const Rational& q, const Rational& epsilon, std::uint64_t p0) {
  if (n < 1) throw InvalidInput("squarefree: n must be >= 1");
  Family f;
  f.a = make_element_set(squarefree_up_to(n));
  f.b = f.a;
  const auto check = theorem51_bound(f.a, f.b, q, epsilon, p0);
  auto& r = f.report;
  r.family = "squarefree";
  r.parameters = {
      {"n", u64s(n)}, {"Q", format_rational(q)}, {"epsilon", format_rational(epsilon)}, {"p0", u64s(p0)}};
  r.size_a = r.size_b = f.a.size();
  r.measured_delta = check.delta;
  const double product = static_cast<double>(r.size_a) * static_cast<double>(r.size_b);
  r.extremal_ratio = check.bound ? product / *check.bound : 0.0;
  r.checks.push_back(
      {"squarefree_bound_holds", check.holds,
       check.bound ? "bound " + std::to_string(*check.bound) : std::string("delta = 0, hypothesis vacuous")});
  return f;
}

}  // namespace gcdlab
