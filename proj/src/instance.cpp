#include "gcdlab/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "gcdlab/errors.hpp"
#include "gcdlab/kernels.hpp"
#include "json.hpp"

namespace gcdlab {

namespace {

constexpr double kLogGuard = 1e-9;

void require_sorted_distinct(const ElementSet& s, const char* name) {
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i - 1] < s[i])) {
      throw InvalidInput(std::string("field '") + name + "': elements must be distinct (" + s[i].str() +
                         " repeated)");
    }
  }
}

void sort_set(ElementSet& s, const char* name) {
  std::sort(s.begin(), s.end());
  require_sorted_distinct(s, name);
}

std::optional<std::vector<std::uint32_t>> as_words(const ElementSet& s) {
  std::vector<std::uint32_t> out;
  out.reserve(s.size());
  for (const auto& v : s) {
    auto w = v.to_u64();
    if (!w || *w > std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
    out.push_back(static_cast<std::uint32_t>(*w));
  }
  return out;
}

void check_range(const ElementSet& s, const Rational& lo, const char* name, const char* bound) {
  const Rational hi = 2 * lo;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Rational v(s[i].value());
    if (v < lo || v > hi) {
      throw InvalidInput(std::string("field '") + name + "[" + std::to_string(i) + "]': value " + s[i].str() +
                         " outside [" + bound + ", 2" + bound + "] = [" + format_rational(lo) + ", " +
                         format_rational(hi) + "]");
    }
  }
}

void check_params(const Params& p) {
  if (p.epsilon <= 0 || p.epsilon >= 1) {
    throw InvalidInput("field 'epsilon': must lie strictly inside (0, 1), got " + format_rational(p.epsilon));
  }
}

double log_rational(const Rational& r) {
  // Split off powers of two so huge or tiny values keep full precision.
  long num_exp = 0;
  long den_exp = 0;
  const double num = mpz_get_d_2exp(&num_exp, r.get_num_mpz_t());
  const double den = mpz_get_d_2exp(&den_exp, r.get_den_mpz_t());
  return std::log(num) - std::log(den) + static_cast<double>(num_exp - den_exp) * std::log(2.0);
}

// nullopt when no 32-bit gcd can reach the threshold.
std::optional<std::uint32_t> threshold_word(const Rational& d) {
  const Natural t = ceil_natural(d);
  if (t <= 1) return 1;
  if (t > std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
  return static_cast<std::uint32_t>(t.get_ui());
}

}  // namespace

ElementSet make_element_set(std::span<const std::uint64_t> values) {
  ElementSet out;
  out.reserve(values.size());
  for (std::uint64_t v : values) out.push_back(factorize(v));
  sort_set(out, "set");
  return out;
}

void GcdInstance::finish() {
  if (a_.empty()) throw InvalidInput("field 'A': must be nonempty");
  if (b_.empty()) throw InvalidInput("field 'B': must be nonempty");
  sort_set(a_, "A");
  sort_set(b_, "B");
  check_params(params_);
  auto aw = as_words(a_);
  auto bw = as_words(b_);
  if (aw && bw) {
    a_words_ = std::move(aw);
    b_words_ = std::move(bw);
  }
}

GcdInstance GcdInstance::make(ElementSet a, ElementSet b, Rational x, Rational y, Rational d, Params params) {
  GcdInstance inst;
  inst.a_ = std::move(a);
  inst.b_ = std::move(b);
  inst.x_ = std::move(x);
  inst.y_ = std::move(y);
  inst.d_ = std::move(d);
  inst.params_ = std::move(params);
  inst.finish();
  if (inst.x_ < 1) throw InvalidInput("field 'X': must be >= 1");
  if (inst.y_ < 1) throw InvalidInput("field 'Y': must be >= 1");
  if (inst.d_ < 1) throw InvalidInput("field 'D': must be >= 1");
  if (inst.d_ > inst.x_ || inst.d_ > inst.y_) {
    throw InvalidInput("field 'D': must not exceed min(X, Y), got " + format_rational(inst.d_));
  }
  check_range(inst.a_, inst.x_, "A", "X");
  check_range(inst.b_, inst.y_, "B", "Y");
  return inst;
}

GcdInstance GcdInstance::infer_ranges(ElementSet a, ElementSet b, Rational d, Params params) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.empty()) throw InvalidInput("field 'A': must be nonempty");
  if (b.empty()) throw InvalidInput("field 'B': must be nonempty");
  Rational x(a.front().value());
  Rational y(b.front().value());
  if (a.back().value() > 2 * a.front().value()) {
    throw InvalidInput("field 'A': max " + a.back().str() +
                       " exceeds 2 min(A) = " + Natural(2 * a.front().value()).get_str());
  }
  if (b.back().value() > 2 * b.front().value()) {
    throw InvalidInput("field 'B': max " + b.back().str() +
                       " exceeds 2 min(B) = " + Natural(2 * b.front().value()).get_str());
  }
  return make(std::move(a), std::move(b), std::move(x), std::move(y), std::move(d), std::move(params));
}

GcdInstance GcdInstance::relaxed(ElementSet a, ElementSet b, Rational d, Params params) {
  GcdInstance inst;
  inst.a_ = std::move(a);
  inst.b_ = std::move(b);
  inst.d_ = std::move(d);
  inst.params_ = std::move(params);
  inst.dyadic_ = false;
  inst.finish();
  if (inst.d_ < 1) throw InvalidInput("field 'D': must be >= 1");
  inst.x_ = Rational(inst.a_.front().value());
  inst.y_ = Rational(inst.b_.front().value());
  return inst;
}

Rational PairSet::delta() const {
  if (size_a == 0 || size_b == 0) return Rational(0);
  Rational out(Natural(static_cast<unsigned long>(edges.size())),
               Natural(static_cast<unsigned long>(size_a)) * static_cast<unsigned long>(size_b));
  out.canonicalize();
  return out;
}

bool PairSet::contains(Edge e) const { return std::binary_search(edges.begin(), edges.end(), e); }

std::vector<std::uint32_t> PairSet::degrees_a() const {
  std::vector<std::uint32_t> deg(size_a, 0);
  for (const auto& [i, j] : edges) ++deg[i];
  return deg;
}

std::vector<std::uint32_t> PairSet::degrees_b() const {
  std::vector<std::uint32_t> deg(size_b, 0);
  for (const auto& [i, j] : edges) ++deg[j];
  return deg;
}

PairSet make_pair_set(std::size_t size_a, std::size_t size_b, std::vector<PairSet::Edge> edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (const auto& [i, j] : edges) {
    if (i >= size_a || j >= size_b) throw InvalidInput("pair set: edge index out of range");
  }
  return PairSet{std::move(edges), size_a, size_b};
}

PairSet build_omega_gcd(const GcdInstance& inst) { return build_omega_gcd(inst.a(), inst.b(), inst.d()); }

PairSet build_omega_gcd(const ElementSet& a, const ElementSet& b, const Rational& d) {
  PairSet out{{}, a.size(), b.size()};
  const auto aw = as_words(a);
  const auto bw = as_words(b);
  if (aw && bw) {
    const auto t = threshold_word(d);
    if (!t) return out;
    std::vector<std::uint32_t> g(bw->size());
    for (std::uint32_t i = 0; i < aw->size(); ++i) {
      kernels::gcd_batch((*aw)[i], *bw, g);
      for (std::uint32_t j = 0; j < g.size(); ++j) {
        if (g[j] >= *t) out.edges.emplace_back(i, j);
      }
    }
    return out;
  }
  const Natural t = ceil_natural(d);
  Natural g;
  for (std::uint32_t i = 0; i < a.size(); ++i) {
    for (std::uint32_t j = 0; j < b.size(); ++j) {
      mpz_gcd(g.get_mpz_t(), a[i].value().get_mpz_t(), b[j].value().get_mpz_t());
      if (g >= t) out.edges.emplace_back(i, j);
    }
  }
  return out;
}

PairSet build_omega_ratio(const ElementSet& a, const ElementSet& b, const Rational& q) {
  PairSet out{{}, a.size(), b.size()};
  Natural g, r;
  for (std::uint32_t i = 0; i < a.size(); ++i) {
    for (std::uint32_t j = 0; j < b.size(); ++j) {
      mpz_gcd(g.get_mpz_t(), a[i].value().get_mpz_t(), b[j].value().get_mpz_t());
      r = (a[i].value() / g) * (b[j].value() / g);
      if (Rational(r) <= q) out.edges.emplace_back(i, j);
    }
  }
  return out;
}

std::uint64_t count_pairs_geq_naive(const ElementSet& a, const ElementSet& b, const Rational& d) {
  const auto aw = as_words(a);
  const auto bw = as_words(b);
  if (aw && bw) {
    const auto t = threshold_word(d);
    if (!t) return 0;
    std::uint64_t total = 0;
    for (std::uint32_t v : *aw) total += kernels::count_gcd_at_least(v, *bw, *t);
    return total;
  }
  return build_omega_gcd(a, b, d).size();
}

std::uint64_t count_pairs_geq_fast(const ElementSet& a, const ElementSet& b, const Rational& d) {
  const Natural t = ceil_natural(d);
  const std::uint64_t floor_d = t <= 1 ? 1 : (mpz_fits_ulong_p(t.get_mpz_t()) ? t.get_ui() : 0);
  for (const auto* side : {&a, &b}) {
    for (const auto& v : *side) {
      if (!v.to_u64()) return count_pairs_geq_naive(a, b, d);
    }
  }
  if (floor_d == 0) return 0;  // threshold beyond 64 bits, no gcd can reach it

  auto multiples = [floor_d](const ElementSet& s) {
    std::unordered_map<std::uint64_t, std::uint64_t> m;
    for (const auto& v : s) {
      for (std::uint64_t div : divisors(v)) {
        if (div >= floor_d) ++m[div];
      }
    }
    return m;
  };
  const auto ma = multiples(a);
  const auto mb = multiples(b);

  std::vector<std::uint64_t> shared;
  for (const auto& [div, count] : ma) {
    if (mb.contains(div)) shared.push_back(div);
  }
  std::sort(shared.begin(), shared.end(), std::greater<>());
  if (shared.empty()) return 0;

  // exact[k] = number of pairs whose gcd is exactly shared[k]
  std::unordered_map<std::uint64_t, std::uint64_t> exact;
  exact.reserve(shared.size());
  const std::uint64_t largest = shared.front();
  std::uint64_t total = 0;
  for (std::size_t k = 0; k < shared.size(); ++k) {
    const std::uint64_t div = shared[k];
    std::uint64_t e = ma.at(div) * mb.at(div);
    if (largest / div < k) {
      for (std::uint64_t m = 2 * div; m <= largest; m += div) {
        if (auto it = exact.find(m); it != exact.end()) e -= it->second;
      }
    } else {
      for (std::size_t l = 0; l < k; ++l) {
        if (shared[l] % div == 0) e -= exact[shared[l]];
      }
    }
    exact[div] = e;
    total += e;
  }
  return total;
}

PrimeSets prime_sets(std::span<const FactoredNat> s, std::uint64_t p0) {
  PrimeSets out;
  for (const auto& v : s) {
    for (const auto& [p, e] : v.factors()) {
      out.all.insert(p);
      if (p <= p0) out.small.insert(p);
    }
  }
  return out;
}

PrimeSets prime_sets(const GcdInstance& inst) {
  ElementSet u = inst.a();
  u.insert(u.end(), inst.b().begin(), inst.b().end());
  return prime_sets(u, inst.p0());
}

namespace {

BoundCheck power_bound(std::size_t small_primes, const Rational& delta, const Rational& epsilon,
                       const Rational& scale, std::size_t size_a, std::size_t size_b) {
  if (delta <= 0) throw InvalidInput("bound: delta must be > 0");
  BoundCheck out;
  const double eps = epsilon.get_d();
  out.log_bound = static_cast<double>(1 + small_primes) * std::log(1000.0) +
                  (-2.0 - eps) * log_rational(delta) + log_rational(scale);
  out.bound = std::exp(out.log_bound);
  out.product = static_cast<double>(size_a) * static_cast<double>(size_b);
  out.holds = std::log(out.product) <= out.log_bound + kLogGuard;
  return out;
}

}  // namespace

BoundCheck theorem1_bound(const GcdInstance& inst, const Rational& delta) {
  const Rational scale = inst.x() * inst.y() / (inst.d() * inst.d());
  return power_bound(prime_sets(inst).small.size(), delta, inst.epsilon(), scale, inst.a().size(),
                     inst.b().size());
}

ChaseCheck chase_diagonal_bound(const ElementSet& a, const Rational& x, const Rational& d) {
  if (a.empty()) throw InvalidInput("chase: A must be nonempty");
  if (d < 1 || x < 1) throw InvalidInput("chase: X and D must be >= 1");
  ElementSet s = a;
  sort_set(s, "A");
  check_range(s, x, "A", "X");
  const Natural t = ceil_natural(d);
  Natural g;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      mpz_gcd(g.get_mpz_t(), s[i].value().get_mpz_t(), s[j].value().get_mpz_t());
      if (g < t) {
        throw InvalidInput("chase: gcd(" + s[i].str() + ", " + s[j].str() + ") = " + g.get_str() +
                           " is below D = " + format_rational(d));
      }
    }
  }
  ChaseCheck out;
  for (std::size_t i = 1; i < s.size(); ++i) {
    Natural gap = s[i].value() - s[i - 1].value();
    if (!out.min_gap || gap < *out.min_gap) out.min_gap = gap;
  }
  if (out.min_gap && Rational(*out.min_gap) < d) {
    throw ConsistencyFailure("chase: gap " + out.min_gap->get_str() + " below D although all gcds reach D");
  }
  out.max_allowed = floor_natural(x / d) + 1;
  out.holds = Natural(static_cast<unsigned long>(s.size())) <= out.max_allowed;
  return out;
}

SquarefreeCheck theorem51_bound(const ElementSet& a, const ElementSet& b, const Rational& q,
                                const Rational& epsilon, std::uint64_t p0) {
  for (const auto* side : {&a, &b}) {
    for (const auto& v : *side) {
      if (!is_squarefree(v)) throw InvalidInput("squarefree bound: " + v.str() + " is not squarefree");
    }
  }
  if (epsilon <= 0 || epsilon >= 1) throw InvalidInput("epsilon must lie in (0, 1)");
  SquarefreeCheck out;
  const PairSet omega = build_omega_ratio(a, b, q);
  out.delta = omega.delta();
  if (out.delta == 0) return out;
  ElementSet u = a;
  u.insert(u.end(), b.begin(), b.end());
  const auto check =
      power_bound(prime_sets(u, p0).small.size(), out.delta, epsilon, q / 4, a.size(), b.size());
  out.bound = check.bound;
  out.holds = check.holds;
  return out;
}

std::string write_instance(const GcdInstance& inst) {
  nlohmann::ordered_json doc;
  auto strings = [](const ElementSet& s) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& v : s) arr.push_back(v.str());
    return arr;
  };
  doc["A"] = strings(inst.a());
  doc["B"] = strings(inst.b());
  if (inst.dyadic()) {
    doc["X"] = format_rational(inst.x());
    doc["Y"] = format_rational(inst.y());
  } else {
    doc["relaxed"] = true;
  }
  doc["D"] = format_rational(inst.d());
  doc["epsilon"] = format_rational(inst.epsilon());
  doc["p0"] = inst.p0();
  return doc.dump(2) + "\n";
}

namespace {

Rational rational_field(const nlohmann::json& doc, const char* name) {
  const auto& v = doc.at(name);
  if (!v.is_string()) throw InvalidInput(std::string("field '") + name + "': expected a decimal string");
  try {
    return parse_rational(v.get<std::string>());
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string("field '") + name + "': " + e.what());
  }
}

ElementSet set_field(const nlohmann::json& doc, const char* name) {
  if (!doc.contains(name)) throw InvalidInput(std::string("field '") + name + "': missing");
  const auto& arr = doc.at(name);
  if (!arr.is_array()) throw InvalidInput(std::string("field '") + name + "': expected an array");
  ElementSet out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = std::string("field '") + name + "[" + std::to_string(i) + "]'";
    if (!arr[i].is_string()) throw InvalidInput(where + ": expected a decimal string");
    Natural v;
    try {
      v = parse_natural(arr[i].get<std::string>());
    } catch (const InvalidInput& e) {
      throw InvalidInput(where + ": " + e.what());
    }
    if (v < 1) throw InvalidInput(where + ": elements must be >= 1");
    out.push_back(factorize(v));
  }
  return out;
}

}  // namespace

GcdInstance read_instance(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("instance file: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidInput("instance file: top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    static const std::set<std::string> known{"A", "B", "X", "Y", "D", "epsilon", "p0", "relaxed"};
    if (!known.contains(key)) throw InvalidInput("instance file: unknown field '" + key + "'");
  }
  ElementSet a = set_field(doc, "A");
  ElementSet b = set_field(doc, "B");
  if (!doc.contains("D")) throw InvalidInput("field 'D': missing");
  Rational d = rational_field(doc, "D");
  Params params;
  if (doc.contains("epsilon")) params.epsilon = rational_field(doc, "epsilon");
  if (doc.contains("p0")) {
    const auto& p0 = doc.at("p0");
    if (!p0.is_number_unsigned()) throw InvalidInput("field 'p0': expected a non-negative integer");
    params.p0 = p0.get<std::uint64_t>();
  }
  const bool has_x = doc.contains("X");
  const bool has_y = doc.contains("Y");
  if (has_x != has_y) throw InvalidInput("fields 'X', 'Y': give both or neither");
  if (doc.contains("relaxed")) {
    const auto& r = doc.at("relaxed");
    if (!r.is_boolean()) throw InvalidInput("field 'relaxed': expected true or false");
    if (r.get<bool>()) {
      if (has_x) throw InvalidInput("field 'relaxed': relaxed instances carry no X, Y");
      return GcdInstance::relaxed(std::move(a), std::move(b), std::move(d), params);
    }
  }
  if (!has_x) return GcdInstance::infer_ranges(std::move(a), std::move(b), std::move(d), params);
  return GcdInstance::make(std::move(a), std::move(b), rational_field(doc, "X"), rational_field(doc, "Y"),
                           std::move(d), params);
}

GcdInstance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open instance file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return read_instance(buf.str());
}

}  // namespace gcdlab
