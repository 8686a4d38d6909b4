#include "gcdlab/arith.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "gcdlab/errors.hpp"

namespace gcdlab {

namespace {

Natural pow_ui(Prime p, int e) {
  Natural out;
  Natural base;
  mpz_set_ui(base.get_mpz_t(), p);
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), static_cast<unsigned long>(e));
  return out;
}

Natural from_u64(std::uint64_t v) {
  Natural out;
  mpz_set_ui(out.get_mpz_t(), v);
  return out;
}

// Brent's variant of Pollard rho. n is odd, composite, and has no factor below
// the sieve limit. Polynomial constants are tried in a fixed order so the
// result is deterministic.
Natural pollard_brent(const Natural& n) {
  for (unsigned long c = 1;; ++c) {
    Natural y = 2, x, q = 1, g = 1, ys;
    const unsigned long m = 128;
    unsigned long r = 1;
    auto step = [&](Natural& v) { v = (v * v + c) % n; };
    do {
      x = y;
      for (unsigned long i = 0; i < r; ++i) step(y);
      unsigned long k = 0;
      while (k < r && g == 1) {
        ys = y;
        for (unsigned long i = 0; i < std::min(m, r - k); ++i) {
          step(y);
          q = (q * abs(x - y)) % n;
        }
        mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
        k += m;
      }
      r *= 2;
    } while (g == 1);
    if (g == n) {
      do {
        step(ys);
        Natural diff = abs(x - ys);
        mpz_gcd(g.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

void split_large(const Natural& n, FactorMap& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    if (!mpz_fits_ulong_p(n.get_mpz_t())) {
      throw InvalidInput("prime factor " + n.get_str() + " exceeds 64 bits");
    }
    out[mpz_get_ui(n.get_mpz_t())] += 1;
    return;
  }
  Natural d = pollard_brent(n);
  split_large(d, out);
  split_large(Natural(n / d), out);
}

}  // namespace

FactoredNat::FactoredNat(FactorMap factors) : value_(1), factors_(std::move(factors)) {
  for (const auto& [p, e] : factors_) {
    if (e < 1) throw InvalidInput("exponent of " + std::to_string(p) + " must be >= 1");
    if (!is_prime(from_u64(p))) throw InvalidInput(std::to_string(p) + " is not prime");
    value_ *= pow_ui(p, e);
  }
}

int FactoredNat::valuation(Prime p) const {
  auto it = factors_.find(p);
  return it == factors_.end() ? 0 : it->second;
}

std::optional<std::uint64_t> FactoredNat::to_u64() const {
  if (!mpz_fits_ulong_p(value_.get_mpz_t())) return std::nullopt;
  return mpz_get_ui(value_.get_mpz_t());
}

FactoredNat operator*(const FactoredNat& lhs, const FactoredNat& rhs) {
  FactorMap f = lhs.factors_;
  for (const auto& [p, e] : rhs.factors_) f[p] += e;
  return FactoredNat(FactoredNat::Trusted{}, Natural(lhs.value_ * rhs.value_), std::move(f));
}

PrimeTable::PrimeTable(std::uint64_t limit) : limit_(std::max<std::uint64_t>(limit, 2)) {
  spf_.assign(limit_ + 1, 0);
  for (std::uint64_t i = 2; i <= limit_; ++i) {
    if (spf_[i] == 0) {
      spf_[i] = static_cast<std::uint32_t>(i);
      primes_.push_back(static_cast<std::uint32_t>(i));
    }
    for (std::uint32_t p : primes_) {
      const std::uint64_t m = p * i;
      if (p > spf_[i] || m > limit_) break;
      spf_[m] = p;
    }
  }
}

const PrimeTable& PrimeTable::shared() {
  static const PrimeTable table;
  return table;
}

bool PrimeTable::is_prime(std::uint64_t n) const {
  if (n <= limit_) return n >= 2 && spf_[n] == n;
  return gcdlab::is_prime(from_u64(n));
}

FactoredNat PrimeTable::factor_small(std::uint64_t n) const {
  if (n == 0 || n > limit_) throw InvalidInput("factor_small: argument out of table range");
  FactorMap f;
  const std::uint64_t original = n;
  while (n > 1) {
    const std::uint32_t p = spf_[n];
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    f[p] = e;
  }
  return FactoredNat(FactoredNat::Trusted{}, from_u64(original), std::move(f));
}

bool is_prime(const Natural& n) {
  if (n < 2) return false;
  const auto& table = PrimeTable::shared();
  if (n <= table.limit()) return table.is_prime(mpz_get_ui(n.get_mpz_t()));
  // BPSW plus Miller-Rabin rounds; no known BPSW pseudoprimes exist.
  return mpz_probab_prime_p(n.get_mpz_t(), 30) > 0;
}

FactoredNat factorize(const Natural& n) {
  if (n <= 0) throw InvalidInput("factorize: argument must be >= 1, got " + n.get_str());
  const auto& table = PrimeTable::shared();
  if (n <= table.limit()) return table.factor_small(mpz_get_ui(n.get_mpz_t()));

  FactorMap f;
  Natural rest = n;
  bool exhausted = true;
  for (std::uint32_t p : table.primes()) {
    if (Natural(Natural(p) * p) > rest) {
      exhausted = false;
      break;
    }
    if (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
      int e = 0;
      while (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
        mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), p);
        ++e;
      }
      f[p] = e;
    }
  }
  if (rest > 1) {
    const Natural limit_sq = Natural(from_u64(table.limit()) * table.limit());
    if (!exhausted || rest < limit_sq) {
      if (!mpz_fits_ulong_p(rest.get_mpz_t())) {
        throw InvalidInput("prime factor " + rest.get_str() + " exceeds 64 bits");
      }
      f[mpz_get_ui(rest.get_mpz_t())] += 1;
    } else {
      split_large(rest, f);
    }
  }
  return FactoredNat(FactoredNat::Trusted{}, n, std::move(f));
}

FactoredNat factorize(std::uint64_t n) { return factorize(from_u64(n)); }

int valuation(Prime p, const FactoredNat& n) { return n.valuation(p); }

ValuationVector rational_valuations(const FactoredNat& a, const FactoredNat& modulus) {
  ValuationVector out;
  for (const auto& [p, e] : a.factors()) out[p] += e;
  for (const auto& [p, e] : modulus.factors()) out[p] -= e;
  std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
  return out;
}

FactoredNat primorial(std::uint64_t bound) {
  FactorMap f;
  if (bound <= PrimeTable::shared().limit()) {
    for (std::uint32_t p : PrimeTable::shared().primes()) {
      if (p > bound) break;
      f[p] = 1;
    }
  } else {
    for (std::uint64_t p = 2; p <= bound; ++p) {
      if (PrimeTable::shared().is_prime(p)) f[p] = 1;
    }
  }
  return FactoredNat(std::move(f));
}

bool is_squarefree(const FactoredNat& n) {
  return std::all_of(n.factors().begin(), n.factors().end(), [](const auto& kv) { return kv.second == 1; });
}

FactoredNat radical(const FactoredNat& n) {
  FactorMap f;
  for (const auto& [p, e] : n.factors()) f[p] = 1;
  return FactoredNat(std::move(f));
}

FactoredNat gcd(const FactoredNat& a, const FactoredNat& b) {
  FactorMap f;
  for (const auto& [p, e] : a.factors()) {
    const int m = std::min(e, b.valuation(p));
    if (m > 0) f[p] = m;
  }
  return FactoredNat(std::move(f));
}

FactoredNat coprime_ratio(const FactoredNat& a, const FactoredNat& b) {
  FactorMap f;
  for (const auto& [p, e] : rational_valuations(a, b)) f[p] = std::abs(e);
  return FactoredNat(std::move(f));
}

std::vector<std::uint64_t> divisors(const FactoredNat& n) {
  if (!n.to_u64()) throw InvalidInput("divisors: value exceeds 64 bits");
  std::vector<std::uint64_t> out{1};
  for (const auto& [p, e] : n.factors()) {
    const std::size_t base = out.size();
    std::uint64_t pk = 1;
    for (int k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Natural parse_natural(const std::string& text) {
  if (text.empty() ||
      !std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw InvalidInput("not a decimal natural: '" + text + "'");
  }
  return Natural(text, 10);
}

Rational parse_rational(const std::string& text) {
  std::string body = text;
  bool negative = false;
  if (!body.empty() && (body[0] == '-' || body[0] == '+')) {
    negative = body[0] == '-';
    body.erase(0, 1);
  }
  Rational out;
  if (auto slash = body.find('/'); slash != std::string::npos) {
    Natural num = parse_natural(body.substr(0, slash));
    Natural den = parse_natural(body.substr(slash + 1));
    if (den == 0) throw InvalidInput("zero denominator in '" + text + "'");
    out = Rational(num, den);
  } else if (auto dot = body.find('.'); dot != std::string::npos) {
    const std::string whole = body.substr(0, dot);
    const std::string frac = body.substr(dot + 1);
    if (frac.empty()) throw InvalidInput("not a number: '" + text + "'");
    Natural num = parse_natural((whole.empty() ? std::string("0") : whole) + frac);
    Natural den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    out = Rational(num, den);
  } else {
    out = Rational(parse_natural(body));
  }
  out.canonicalize();
  return negative ? Rational(-out) : out;
}

std::string format_rational(const Rational& value) {
  if (value.get_den() == 1) return value.get_num().get_str();
  Natural den = value.get_den();
  unsigned long twos = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), Natural(2).get_mpz_t());
  unsigned long fives = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), Natural(5).get_mpz_t());
  if (den != 1) return value.get_num().get_str() + "/" + value.get_den().get_str();

  const unsigned long digits = std::max(twos, fives);
  Natural scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
  Natural scaled = abs(value.get_num()) * (scale / value.get_den());
  std::string s = scaled.get_str();
  if (s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
  s.insert(s.size() - digits, ".");
  return (value < 0 ? "-" : "") + s;
}

Natural ceil_natural(const Rational& value) {
  Natural out;
  mpz_cdiv_q(out.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
  return out;
}

Natural floor_natural(const Rational& value) {
  Natural out;
  mpz_fdiv_q(out.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
  return out;
}

}  // namespace gcdlab
