#pragma once

// Exact integer arithmetic with cached factorizations.
//
// Every integer the lab touches is a FactoredNat: a GMP natural together with
// its canonical prime factorization. Valuations, radicals and gcds are then
// read off the factor map instead of being recomputed.

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gcdlab {

using Natural = mpz_class;
using Rational = mpq_class;
using Prime = std::uint64_t;
using FactorMap = std::map<Prime, int>;

class FactoredNat {
 public:
  FactoredNat() : value_(1) {}

  // Builds the value from the factor map. Keys must be prime, exponents >= 1;
  // primality is checked.
  explicit FactoredNat(FactorMap factors);

  const Natural& value() const { return value_; }
  const FactorMap& factors() const { return factors_; }

  int valuation(Prime p) const;
  bool is_one() const { return factors_.empty(); }
  std::optional<std::uint64_t> to_u64() const;
  std::string str() const { return value_.get_str(); }

  friend FactoredNat operator*(const FactoredNat& lhs, const FactoredNat& rhs);
  friend bool operator==(const FactoredNat& lhs, const FactoredNat& rhs) { return lhs.value_ == rhs.value_; }
  friend std::strong_ordering operator<=>(const FactoredNat& lhs, const FactoredNat& rhs) {
    return cmp(lhs.value_, rhs.value_) <=> 0;
  }

 private:
  struct Trusted {};
  FactoredNat(Trusted, Natural value, FactorMap factors)
      : value_(std::move(value)), factors_(std::move(factors)) {}

  friend FactoredNat factorize(const Natural& n);
  friend class PrimeTable;

  Natural value_;
  FactorMap factors_;
};

// v_p of a rational a/N for every prime; zero entries omitted.
using ValuationVector = std::map<Prime, int>;

// Smallest-prime-factor sieve shared by factorization and primality tests.
class PrimeTable {
 public:
  static constexpr std::uint64_t kDefaultLimit = 1'000'000;

  explicit PrimeTable(std::uint64_t limit = kDefaultLimit);

  // Process-wide table built lazily at kDefaultLimit.
  static const PrimeTable& shared();

  std::uint64_t limit() const { return limit_; }
  const std::vector<std::uint32_t>& primes() const { return primes_; }
  bool is_prime(std::uint64_t n) const;
  FactoredNat factor_small(std::uint64_t n) const;  // requires 1 <= n <= limit

 private:
  std::uint64_t limit_;
  std::vector<std::uint32_t> spf_;
  std::vector<std::uint32_t> primes_;
};

bool is_prime(const Natural& n);

// Trial division through the shared sieve, then Pollard-Brent splitting for
// what is left. Throws InvalidInput on 0 and on prime factors >= 2^64.
FactoredNat factorize(const Natural& n);
FactoredNat factorize(std::uint64_t n);

int valuation(Prime p, const FactoredNat& n);
ValuationVector rational_valuations(const FactoredNat& a, const FactoredNat& modulus);

FactoredNat primorial(std::uint64_t bound);
bool is_squarefree(const FactoredNat& n);
FactoredNat radical(const FactoredNat& n);

// gcd via min of valuations.
FactoredNat gcd(const FactoredNat& a, const FactoredNat& b);

// ab / gcd(a,b)^2, i.e. prod p^{|v_p(a) - v_p(b)|}.
FactoredNat coprime_ratio(const FactoredNat& a, const FactoredNat& b);

std::vector<std::uint64_t> divisors(const FactoredNat& n);

// Rational <-> text. Accepts "12", "-3", "2.5", "7/3"; formats as an integer,
// a terminating decimal, or p/q, whichever is exact.
Rational parse_rational(const std::string& text);
std::string format_rational(const Rational& value);
Natural parse_natural(const std::string& text);

Natural ceil_natural(const Rational& value);
Natural floor_natural(const Rational& value);

}  // namespace gcdlab
