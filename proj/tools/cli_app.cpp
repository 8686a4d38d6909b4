#include "cli_app.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gcdlab/errors.hpp"
#include "gcdlab/families.hpp"
#include "gcdlab/instance.hpp"
#include "gcdlab/kernels.hpp"
#include "gcdlab/measure.hpp"
#include "gcdlab/search.hpp"
#include "gcdlab/structure.hpp"
#include "json.hpp"

namespace gcdlab::cli {

namespace {

std::function<void(const std::string&)> g_pre_command_hook;

using Json = nlohmann::ordered_json;

struct RunConfig {
  std::string epsilon_text = "1/2";
  Rational epsilon{1, 2};
  std::uint64_t p0 = 100;
  std::uint64_t seed = 1;
  std::string format = "json";
  std::uint64_t limit = 20;
  std::string isa = "auto";
  bool epsilon_given = false;
  bool p0_given = false;

  Params params() const { return {epsilon, p0}; }
};

Json config_json(const RunConfig& c) {
  Json j;
  j["epsilon"] = format_rational(c.epsilon);
  j["p0"] = c.p0;
  j["seed"] = c.seed;
  j["limit"] = c.limit;
  return j;
}

std::string rat(const Rational& r) { return format_rational(r); }

Json factors_json(const FactoredNat& n) {
  Json j = Json::object();
  for (const auto& [p, e] : n.factors()) j[std::to_string(p)] = e;
  return j;
}

Json set_json(const ElementSet& s) {
  Json j = Json::array();
  for (const auto& v : s) j.push_back(v.str());
  return j;
}

Json u64_list(const std::vector<std::uint64_t>& v) {
  Json j = Json::array();
  for (auto x : v) j.push_back(x);
  return j;
}

Json interval_json(const Interval& i) { return Json::array({i.lo, i.hi}); }

// Instance from a file with the global epsilon / p0 overriding the file's own
// values when given.
GcdInstance load_with_config(const std::string& path, const RunConfig& cfg) {
  GcdInstance inst = load_instance_file(path);
  if (!cfg.epsilon_given && !cfg.p0_given) return inst;
  Params p = inst.params();
  if (cfg.epsilon_given) p.epsilon = cfg.epsilon;
  if (cfg.p0_given) p.p0 = cfg.p0;
  if (!inst.dyadic()) return GcdInstance::relaxed(inst.a(), inst.b(), inst.d(), p);
  return GcdInstance::make(inst.a(), inst.b(), inst.x(), inst.y(), inst.d(), p);
}

Json instance_json(const GcdInstance& inst) {
  Json j;
  j["size_a"] = inst.a().size();
  j["size_b"] = inst.b().size();
  j["X"] = rat(inst.x());
  j["Y"] = rat(inst.y());
  j["D"] = rat(inst.d());
  j["dyadic"] = inst.dyadic();
  j["epsilon"] = rat(inst.epsilon());
  j["p0"] = inst.p0();
  return j;
}

Json defect_json(const DefectDecomposition& d) {
  Json j;
  j["plus"] = d.plus.str();
  j["minus"] = d.minus.str();
  j["star"] = d.star.str();
  return j;
}

Json witness_json(const WitnessReport& w) {
  Json j;
  j["a"] = w.a.str();
  j["b"] = w.b.str();
  j["a_defect"] = defect_json(w.a_defect);
  j["b_defect"] = defect_json(w.b_defect);
  j["delta_omega"] = rat(w.delta_omega);
  j["delta_prime"] = rat(w.delta_prime);
  j["delta"] = rat(w.delta);
  j["heavy_count"] = w.heavy_count;
  j["heavy_required"] = rat(w.heavy_required);
  j["degree"] = w.degree;
  j["degree_required"] = rat(w.degree_required);
  j["a_star_required"] = rat(w.a_star_required);
  j["b_star_required"] = rat(w.b_star_required);
  j["star_product"] = w.star_product.get_str();
  j["star_product_bound"] = rat(w.star_product_bound);
  j["product"] = rat(w.product);
  j["bound"] = rat(w.bound);
  j["bound_prime"] = rat(w.bound_prime);
  j["holds"] = w.holds;
  return j;
}

Json sigma_json(const SigmaDecomposition& s) {
  Json j;
  j["k"] = s.k;
  j["sigma"] = Json::array();
  for (double v : s.sigma) j["sigma"].push_back(v);
  j["gamma"] = s.gamma;
  j["sup_index"] = s.sup_index;
  return j;
}

Json concentration_json(const ConcentrationReport& r) {
  Json j;
  j["c"] = {{"value", r.c.value},
            {"enclosure", interval_json(r.c.enclosure)},
            {"attained_at", Json::array({r.c.attained_at.first, r.c.attained_at.second})}};
  j["c_at_least_ninth"] = r.c_at_least_ninth;
  j["center"] = r.center;
  j["tail"] = r.tail;
  j["lambda"] = r.lambda;
  j["exponent"] = r.exponent;
  j["lambda_power"] = r.lambda_power;
  j["ratio"] = r.ratio;
  j["sigma"] = sigma_json(r.sigma);
  j["proof_sigma"] = sigma_json(r.proof_sigma);
  j["chain_ratios"] = Json::array();
  for (const auto& c : r.chain_ratios) {
    if (c) {
      j["chain_ratios"].push_back(*c);
    } else {
      j["chain_ratios"].push_back(nullptr);
    }
  }
  return j;
}

Json family_json(const FamilyReport& r) {
  Json j;
  j["family"] = r.family;
  j["parameters"] = Json::object();
  for (const auto& [k, v] : r.parameters) j["parameters"][k] = v;
  j["size_a"] = r.size_a;
  j["size_b"] = r.size_b;
  j["measured_delta"] = rat(r.measured_delta);
  j["extremal_ratio"] = r.extremal_ratio;
  j["checks"] = Json::array();
  for (const auto& c : r.checks) {
    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  return j;
}

Json violations_json(const std::vector<Violation>& v) {
  Json j = Json::array();
  for (const auto& x : v) j.push_back({{"kind", x.kind}, {"instance", x.instance}, {"detail", x.detail}});
  return j;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write '" + path + "'");
  f << text;
}

// Census of one side over T = 1, 2, 4, ... past the largest defect among the
// elements that carry an Omega' edge.
Json census_rows(const ElementSet& side, const std::vector<std::uint32_t>& degree, const FactoredNat& n,
                 const Rational& x, bool& ok) {
  Json rows = Json::array();
  ElementSet s;
  Natural largest = 1;
  for (std::size_t i = 0; i < side.size(); ++i) {
    if (degree[i] == 0) continue;
    s.push_back(side[i]);
    const Natural star = defect(side[i], n).star.value();
    if (star > largest) largest = star;
  }
  if (s.empty()) return rows;
  for (Natural t = 1;; t *= 2) {
    const auto c = defect_census(s, n, x, Rational(t));
    rows.push_back({{"T", t.get_str()},
                    {"count", c.count},
                    {"bound", rat(c.bound)},
                    {"holds", c.holds},
                    {"ranges_hold", c.ranges_hold}});
    ok = ok && c.holds && c.ranges_hold;
    if (t > largest) break;
  }
  return rows;
}

// --- commands ---------------------------------------------------------------

int cmd_stats(const std::string& path, const RunConfig& cfg, Json& rep) {
  const GcdInstance inst = load_with_config(path, cfg);
  const PairSet omega = build_omega_gcd(inst);
  rep["instance"] = instance_json(inst);
  rep["omega_size"] = omega.size();
  const Rational delta = omega.delta();
  rep["delta"] = rat(delta);
  rep["delta_value"] = delta.get_d();
  const std::uint64_t naive = count_pairs_geq_naive(inst.a(), inst.b(), inst.d());
  const std::uint64_t fast = count_pairs_geq_fast(inst.a(), inst.b(), inst.d());
  rep["census"] = {{"naive", naive}, {"fast", fast}, {"agree", naive == fast && fast == omega.size()}};
  const PrimeSets ps = prime_sets(inst);
  rep["primes"] = Json::array();
  for (Prime p : ps.all) rep["primes"].push_back(p);
  rep["small_primes"] = Json::array();
  for (Prime p : ps.small) rep["small_primes"].push_back(p);
  bool ok = naive == fast && fast == omega.size();
  if (delta == 0) {
    rep["bound"] = {{"skipped", "delta = 0: no pair meets D, the bound is vacuous"}};
  } else if (!inst.dyadic()) {
    rep["bound"] = {{"skipped", "relaxed instance: ranges are not dyadic"}};
  } else {
    const BoundCheck b = theorem1_bound(inst, delta);
    rep["bound"] = {
        {"value", b.bound}, {"log_value", b.log_bound}, {"product", b.product}, {"holds", b.holds}};
    ok = ok && b.holds;
  }
  return ok ? kOk : kViolation;
}

int cmd_structure(const std::string& path, const RunConfig& cfg, Json& rep) {
  const GcdInstance inst = load_with_config(path, cfg);
  if (!inst.dyadic()) throw InvalidInput("structure: instance must have dyadic ranges");
  const PairSet omega = build_omega_gcd(inst);
  if (omega.empty()) throw InvalidInput("structure: no pair has gcd >= D");
  const StructuredInstance si = find_modulus(inst, omega);
  rep["instance"] = instance_json(inst);
  rep["modulus"] = {{"value", si.modulus.str()}, {"factors", factors_json(si.modulus)}};
  rep["modulus_search"] = si.search == ModulusSearch::Exhaustive ? "exhaustive" : "greedy";
  rep["omega_size"] = si.omega.size();
  rep["omega_prime_size"] = si.omega_prime.size();
  rep["retained_fraction"] = rat(si.retained_fraction());
  if (si.retained_fraction() < Rational(1, 2)) rep["warning"] = "Omega' keeps less than half of Omega";

  Json defects = Json::array();
  auto add_side = [&](const ElementSet& s, const char* side) {
    for (const auto& a : s) {
      Json row{{"side", side}, {"value", a.str()}};
      try {
        const auto d = defect(a, si.modulus);
        row["valid"] = true;
        row.update(defect_json(d));
      } catch (const InvalidDefect&) {
        row["valid"] = false;
      }
      defects.push_back(row);
    }
  };
  add_side(inst.a(), "A");
  add_side(inst.b(), "B");
  rep["defects"] = defects;

  if (si.omega_prime.empty()) {
    rep["witness"] = {{"skipped", "Omega' is empty"}};
    return kOk;
  }
  bool ok = true;
  rep["census"] = {{"A", census_rows(inst.a(), si.omega_prime.degrees_a(), si.modulus, inst.x(), ok)},
                   {"B", census_rows(inst.b(), si.omega_prime.degrees_b(), si.modulus, inst.y(), ok)}};
  const WitnessReport w = extract_witnesses(si);
  rep["witness"] = witness_json(w);
  ok = ok && w.holds;
  return ok ? kOk : kViolation;
}

struct DefectArgs {
  std::string a, n, b, instance, t;
};

int cmd_defect(const DefectArgs& args, const RunConfig& cfg, Json& rep) {
  const FactoredNat n = factorize(parse_natural(args.n));
  rep["modulus"] = {{"value", n.str()}, {"factors", factors_json(n)}};
  bool ok = true;
  if (!args.a.empty()) {
    const FactoredNat a = factorize(parse_natural(args.a));
    Json ja{{"value", a.str()}};
    Json vals = Json::object();
    for (const auto& [p, v] : rational_valuations(a, n)) vals[std::to_string(p)] = v;
    ja["valuations"] = vals;
    ja.update(defect_json(defect(a, n)));
    rep["a"] = ja;
    if (!args.b.empty()) {
      const FactoredNat b = factorize(parse_natural(args.b));
      Json jb{{"value", b.str()}};
      jb.update(defect_json(defect(b, n)));
      rep["b"] = jb;
      const bool piv = check_pivotal(a, b, n);
      rep["pivotal"] = piv;
      if (piv) {
        Json rows = Json::array();
        for (const auto& r : quad_identity_table(a, b, n)) {
          rows.push_back({{"p", r.p},
                          {"va", r.va},
                          {"vb", r.vb},
                          {"star_a", r.star_a},
                          {"star_b", r.star_b},
                          {"ok", r.ok}});
          ok = ok && r.ok;
        }
        const bool holds = quad_identity_check(a, b, n);
        rep["quad"] = {{"holds", holds}, {"rows", rows}};
        ok = ok && holds;
      } else {
        rep["quad"] = {{"skipped", "pivotal condition fails"}};
      }
    }
  }
  if (!args.instance.empty()) {
    if (args.t.empty()) throw InvalidInput("defect: --instance needs --t");
    const GcdInstance inst = load_with_config(args.instance, cfg);
    const Rational t = parse_rational(args.t);
    const DefectCensus c = defect_census(inst.a(), n, inst.x(), t);
    rep["census"] = {{"T", rat(t)},
                     {"count", c.count},
                     {"bound", rat(c.bound)},
                     {"holds", c.holds},
                     {"plus_bound", c.plus_bound},
                     {"minus_bound", c.minus_bound},
                     {"ranges_hold", c.ranges_hold},
                     {"range_failures", c.range_failures}};
    ok = ok && c.holds && c.ranges_hold;
  }
  if (args.a.empty() && args.instance.empty()) throw InvalidInput("defect: give --a or --instance");
  return ok ? kOk : kViolation;
}

struct MeasureArgs {
  std::vector<std::int64_t> point_mass;
  double lambda = 0;
  bool lambda_given = false;
  std::string input;
  std::string instance;
  std::uint64_t prime = 0;
};

std::map<std::int64_t, double> weight_map(const Json& arr, const char* name) {
  if (!arr.is_array())
    throw InvalidInput(std::string("field '") + name + "': expected [[index, weight], ...]");
  std::map<std::int64_t, double> m;
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number()) {
      throw InvalidInput(std::string("field '") + name + "': expected [index, weight] pairs");
    }
    m[e[0].get<std::int64_t>()] += e[1].get<double>();
  }
  return m;
}

int cmd_measure(const MeasureArgs& args, const RunConfig& cfg, Json& rep) {
  const Rational qp = (2 + cfg.epsilon) / (1 + cfg.epsilon);
  const int modes = (!args.point_mass.empty()) + (!args.input.empty()) + (!args.instance.empty());
  if (modes != 1) throw InvalidInput("measure: give exactly one of --point-mass, --input, --instance");
  ConcentrationReport r;
  if (!args.point_mass.empty()) {
    if (!args.lambda_given) throw InvalidInput("measure: --point-mass needs --lambda");
    const Point at{args.point_mass[0], args.point_mass[1]};
    const Measure2D mu = Measure2D::point_mass(at);
    const WeightPair w = WeightPair::from_values({{at.first, 1.0}}, {{at.second, 1.0}}, qp.get_d());
    rep["source"] = "point_mass";
    r = concentration_report(mu, w, Interval::point(args.lambda), cfg.epsilon);
  } else if (!args.input.empty()) {
    std::ifstream f(args.input);
    if (!f) throw InvalidInput("cannot open '" + args.input + "'");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidInput(std::string("measure input: malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("mu") || !doc.contains("x") || !doc.contains("y")) {
      throw InvalidInput("measure input: needs fields mu, x, y (and lambda)");
    }
    std::map<Point, double> mu;
    for (const auto& e : doc["mu"]) {
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
          !e[2].is_number()) {
        throw InvalidInput("field 'mu': expected [i, j, weight] triples");
      }
      mu[{e[0].get<std::int64_t>(), e[1].get<std::int64_t>()}] += e[2].get<double>();
    }
    double lambda = args.lambda;
    if (!args.lambda_given) {
      if (!doc.contains("lambda") || !doc["lambda"].is_number())
        throw InvalidInput("field 'lambda': missing");
      lambda = doc["lambda"].get<double>();
    }
    const WeightPair w =
        WeightPair::from_values(weight_map(doc["x"], "x"), weight_map(doc["y"], "y"), qp.get_d());
    rep["source"] = "input";
    r = concentration_report(Measure2D::from_weights(std::move(mu)), w, Interval::point(lambda), cfg.epsilon);
  } else {
    if (args.prime == 0) throw InvalidInput("measure: --instance needs --prime");
    const GcdInstance inst = load_with_config(args.instance, cfg);
    const PairSet omega = build_omega_gcd(inst);
    if (omega.empty()) throw InvalidInput("measure: no pair has gcd >= D");
    const StructuredInstance si = find_modulus(inst, omega);
    if (si.omega_prime.empty()) throw InvalidInput("measure: Omega' is empty");
    const ValuationMeasure vm = valuation_measure(inst, si.omega_prime, args.prime);
    Json v;
    v["p"] = vm.p;
    v["alpha"] = Json::array();
    for (const auto& [i, a] : vm.alpha) v["alpha"].push_back(Json::array({i, rat(a)}));
    v["beta"] = Json::array();
    for (const auto& [j, b] : vm.beta) v["beta"].push_back(Json::array({j, rat(b)}));
    v["mu"] = Json::array();
    for (const auto& [ij, m] : vm.mu) v["mu"].push_back(Json::array({ij.first, ij.second, rat(m)}));
    rep["source"] = "instance";
    rep["modulus"] = si.modulus.str();
    rep["valuation_measure"] = v;
    const LemmaSetup ls = lemma_setup(vm, inst.epsilon());
    rep["lambda_enclosure"] = interval_json(ls.lambda);
    r = concentration_report(ls.mu, ls.weights, ls.lambda, inst.epsilon());
  }
  rep["report"] = concentration_json(r);
  return r.c_at_least_ninth ? kOk : kViolation;
}

struct FamilyArgs {
  std::uint64_t x = 0, y = 0, d = 0, n = 0;
  std::string delta = "1", q;
  std::string emit;
};

int cmd_family(const std::string& which, const FamilyArgs& args, const RunConfig& cfg, Json& rep) {
  std::optional<GcdInstance> emit;
  const Rational dr(Natural(static_cast<unsigned long>(args.d)));
  int code = kOk;
  if (which == "remark2") {
    const std::uint64_t y = args.y ? args.y : args.x;
    Family f = remark2_family(args.x, y, args.d);
    rep["report"] = family_json(f.report);
    if (!args.emit.empty()) {
      emit = GcdInstance::make(f.a, f.b, Rational(Natural(static_cast<unsigned long>(args.x))),
                               Rational(Natural(static_cast<unsigned long>(y))), dr, cfg.params());
    }
    code = f.report.all_passed() ? kOk : kViolation;
  } else if (which == "remark3") {
    Family f = remark3_family(args.x, args.d, parse_rational(args.delta));
    rep["report"] = family_json(f.report);
    if (!args.emit.empty()) {
      const Rational xr(Natural(static_cast<unsigned long>(args.x)));
      emit = args.d <= args.x ? GcdInstance::make(f.a, f.b, xr, xr, dr, cfg.params())
                              : GcdInstance::relaxed(f.a, f.b, dr, cfg.params());
    }
    code = f.report.all_passed() ? kOk : kViolation;
  } else if (which == "sec5") {
    Sec5Family f = sec5_family(args.x);
    rep["report"] = family_json(f.report);
    rep["max_ratio"] = f.max_ratio.get_str();
    rep["growth_constant"] = f.growth_constant;
    rep["A"] = set_json(f.a);
    if (!args.emit.empty()) emit = GcdInstance::relaxed(f.a, f.a, Rational(1), cfg.params());
    code = f.report.all_passed() ? kOk : kViolation;
  } else if (which == "squarefree") {
    if (args.q.empty()) throw InvalidInput("family squarefree: --Q is required");
    Family f = squarefree_instance(args.n, parse_rational(args.q), cfg.epsilon, cfg.p0);
    rep["report"] = family_json(f.report);
    if (!args.emit.empty()) emit = GcdInstance::relaxed(f.a, f.b, Rational(1), cfg.params());
    code = f.report.all_passed() ? kOk : kViolation;
  }
  if (emit) {
    write_file(args.emit, write_instance(*emit));
    rep["emitted"] = args.emit;
  }
  return code;
}

struct SearchArgs {
  std::uint64_t x = 0, y = 0, d = 0;
  std::string delta = "1";
  bool symmetric = false;
  bool no_chase_prune = false;
  std::uint64_t scale = 16;
  std::uint64_t count = 10'000;
};

int cmd_search_exhaustive(const SearchArgs& args, const RunConfig& cfg, Json& rep) {
  SearchSpace s;
  s.x = args.x;
  s.y = args.y ? args.y : args.x;
  s.d = args.d;
  s.delta_target = parse_rational(args.delta);
  s.mode = s.delta_target == 1 ? SearchMode::ExactDeltaOne : SearchMode::ThresholdDelta;
  s.limit = cfg.limit;
  s.symmetric = args.symmetric;
  s.chase_prune = !args.no_chase_prune;
  const SearchResult r = exhaustive_max(s, cfg.seed);
  rep["space"] = {{"X", s.x},
                  {"Y", s.y},
                  {"D", s.d},
                  {"delta_target", rat(s.delta_target)},
                  {"mode", s.mode == SearchMode::ExactDeltaOne ? "exact-delta-1" : "threshold-delta"},
                  {"symmetric", s.symmetric}};
  rep["best_a"] = u64_list(r.best_a);
  rep["best_b"] = u64_list(r.best_b);
  rep[r.exact ? "max_product" : "lower_bound"] = r.max_product;
  rep["good_pairs"] = r.good_pairs;
  rep["exact"] = r.exact;
  rep["nodes"] = r.nodes;
  return kOk;
}

int cmd_search_hunt(const SearchArgs& args, const RunConfig& cfg, Json& rep) {
  const HuntSummary h = hunt_violations(args.scale, cfg.seed, args.count);
  rep["scale_limit"] = args.scale;
  rep["diagonal_cases"] = h.diagonal_cases;
  rep["structured_cases"] = h.structured_cases;
  rep["structured_skipped"] = h.structured_skipped;
  rep["remark2_cases"] = h.remark2_cases;
  rep["violations"] = violations_json(h.violations);
  return h.violations.empty() ? kOk : kViolation;
}

int cmd_verify_all(const RunConfig& cfg, Json& rep) {
  Json checks = Json::array();
  bool all = true;
  auto check = [&](const std::string& name, bool passed, const std::string& detail) {
    checks.push_back({{"name", name}, {"passed", passed}, {"detail", detail}});
    all = all && passed;
  };

  {
    Rng rng(cfg.seed);
    std::uint64_t mismatches = 0;
    for (int i = 0; i < 50; ++i) {
      std::vector<std::uint64_t> a(static_cast<std::size_t>(rng.between(1, 64)));
      std::vector<std::uint64_t> b(static_cast<std::size_t>(rng.between(1, 64)));
      for (auto& v : a) v = static_cast<std::uint64_t>(rng.between(1, 1'000'000));
      for (auto& v : b) v = static_cast<std::uint64_t>(rng.between(1, 1'000'000));
      for (auto* v : {&a, &b}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
      }
      const ElementSet sa = make_element_set(a), sb = make_element_set(b);
      const std::uint64_t d = std::array<std::uint64_t, 4>{2, 5, 17, 1000}[rng.below(4)];
      const Rational dr(Natural(static_cast<unsigned long>(d)));
      if (count_pairs_geq_fast(sa, sb, dr) != count_pairs_geq_naive(sa, sb, dr)) ++mismatches;
    }
    check("census_equivalence", mismatches == 0, std::to_string(mismatches) + " mismatches in 50 instances");
  }
  {
    bool ok = true;
    for (std::uint64_t x = 2; x <= 40; ++x) ok = ok && sec5_family(x).report.all_passed();
    const bool spots =
        sec5_family(2).a.size() == 3 && sec5_family(4).a.size() == 5 && sec5_family(7).a.size() == 13;
    check("sec5_family", ok && spots, "X = 2..40, sizes 3, 5, 13 at X = 2, 4, 7");
  }
  {
    SearchSpace s;
    s.x = s.y = 4;
    s.d = 2;
    const auto r = exhaustive_max(s);
    const bool ok = r.max_product == 9 && r.best_a == std::vector<std::uint64_t>{4, 6, 8};
    check("exhaustive_sharpness", ok, "X = Y = 4, D = 2: max product " + std::to_string(r.max_product));
  }
  {
    const HuntSummary h = hunt_violations(16, cfg.seed, 500);
    check("hunt", h.violations.empty(), std::to_string(h.violations.size()) + " violations");
  }
  {
    const auto w = WeightPair::from_values({{0, 1.0}}, {{0, 1.0}},
                                           Rational((2 + cfg.epsilon) / (1 + cfg.epsilon)).get_d());
    const auto r = concentration_report(Measure2D::point_mass({0, 0}), w, Interval::point(0.5), cfg.epsilon);
    check("point_mass_concentration", r.c_at_least_ninth && r.tail == 0, "c = 1, tail 0 at lambda = 1/2");
  }
  rep["checks"] = checks;
  return all ? kOk : kViolation;
}

// --- report output ----------------------------------------------------------

void flatten(const Json& j, const std::string& path, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, path.empty() ? k : path + "." + k, rows);
  } else if (j.is_array()) {
    if (j.empty()) rows.emplace_back(path, "[]");
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "." + std::to_string(i), rows);
  } else if (j.is_string()) {
    rows.emplace_back(path, j.get<std::string>());
  } else {
    rows.emplace_back(path, j.dump());
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void emit_report(const Json& rep, const RunConfig& cfg, std::ostream& out) {
  if (cfg.format == "csv") {
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(rep, "", rows);
    out << write_csv_report(rows);
  } else {
    out << rep.dump(2) << "\n";
  }
}

}  // namespace

std::string write_csv_report(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string s = "path,value\n";
  for (const auto& [k, v] : rows) s += csv_field(k) + "," + csv_field(v) + "\n";
  return s;
}

std::vector<std::pair<std::string, std::string>> parse_csv_report(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> rows;
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false, header = true;
  auto end_row = [&] {
    fields.push_back(cur);
    cur.clear();
    if (header) {
      if (fields != std::vector<std::string>{"path", "value"}) throw InvalidInput("csv report: bad header");
      header = false;
    } else {
      if (fields.size() != 2) throw InvalidInput("csv report: expected two fields per row");
      rows.emplace_back(fields[0], fields[1]);
    }
    fields.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c == '\n') {
      end_row();
    } else {
      cur += c;
    }
  }
  if (quoted) throw InvalidInput("csv report: unterminated quote");
  if (!cur.empty() || !fields.empty()) end_row();
  return rows;
}

void set_pre_command_hook(std::function<void(const std::string&)> hook) {
  g_pre_command_hook = std::move(hook);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Experiments on GCD graphs: instances, structure, measures, families, search", "gcdlab"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  app.add_option("--epsilon", cfg.epsilon_text, "epsilon in (0, 1), decimal or p/q (default 1/2)");
  app.add_option("--p0", cfg.p0, "small-prime threshold (default 100)");
  app.add_option("--seed", cfg.seed, "random seed (default 1)");
  app.add_option("--format", cfg.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--limit", cfg.limit, "exhaustive search: integers per side (default 20)");
  app.add_option("--isa", cfg.isa, "gcd kernel: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  std::string instance_path;
  auto* stats = app.add_subcommand("stats", "pair density, prime sets and the main bound");
  stats->add_option("instance", instance_path, "instance file")->required();
  auto* structure = app.add_subcommand("structure", "modulus, defects, census and witness chain");
  structure->add_option("instance", instance_path, "instance file")->required();

  DefectArgs dargs;
  auto* defect_cmd = app.add_subcommand("defect", "defect decomposition, quad identity, census");
  defect_cmd->add_option("--a", dargs.a, "element");
  defect_cmd->add_option("--b", dargs.b, "second element (quad identity)");
  defect_cmd->add_option("--n", dargs.n, "modulus N")->required();
  defect_cmd->add_option("--instance", dargs.instance, "census over A of this instance");
  defect_cmd->add_option("--t", dargs.t, "census threshold T");

  MeasureArgs margs;
  auto* measure = app.add_subcommand("measure", "concentration report for a measure on Z^2");
  measure->add_option("--point-mass", margs.point_mass, "point mass at (I, J)")->expected(2);
  auto* lambda_opt = measure->add_option("--lambda", margs.lambda, "lambda in (0, 4/5]");
  measure->add_option("--input", margs.input, "JSON file with mu, x, y, lambda");
  measure->add_option("--instance", margs.instance, "instance file (valuation measure)");
  measure->add_option("--prime", margs.prime, "prime for the valuation measure");

  FamilyArgs fargs;
  auto* family = app.add_subcommand("family", "explicit extremal families");
  family->require_subcommand(1);
  family->add_option("--emit-set", fargs.emit, "write the sets as an instance file");
  auto* f_r2 = family->add_subcommand("remark2", "multiples of D in [X, 2X] and [Y, 2Y]");
  f_r2->add_option("--X", fargs.x)->required();
  f_r2->add_option("--Y", fargs.y, "defaults to X");
  f_r2->add_option("--D", fargs.d)->required();
  auto* f_r3 = family->add_subcommand("remark3", "multiples of floor(delta D) in [X, 2X]");
  f_r3->add_option("--X", fargs.x)->required();
  f_r3->add_option("--D", fargs.d)->required();
  f_r3->add_option("--delta", fargs.delta)->required();
  auto* f_s5 = family->add_subcommand("sec5", "P m / n over coprime squarefree m n <= X");
  f_s5->add_option("--X", fargs.x)->required();
  auto* f_sq = family->add_subcommand("squarefree", "squarefree integers up to n");
  f_sq->add_option("--n", fargs.n)->required();
  f_sq->add_option("--Q", fargs.q)->required();
  for (auto* sub : {f_r2, f_r3, f_s5, f_sq}) {
    sub->fallthrough();
    sub->add_option("--emit-set", fargs.emit, "write the sets as an instance file");
  }

  SearchArgs sargs;
  auto* search = app.add_subcommand("search", "extremal search and violation hunt");
  search->require_subcommand(1);
  auto* s_ex = search->add_subcommand("exhaustive", "maximise |A||B| on [X, 2X] x [Y, 2Y]");
  s_ex->add_option("--X", sargs.x)->required();
  s_ex->add_option("--Y", sargs.y, "defaults to X");
  s_ex->add_option("--D", sargs.d)->required();
  s_ex->add_option("--delta", sargs.delta, "density target in (0, 1] (default 1)");
  s_ex->add_flag("--symmetric", sargs.symmetric, "force A = B");
  s_ex->add_flag("--no-chase-prune", sargs.no_chase_prune, "do not stop at floor(X/D) + 1");
  auto* s_hunt = search->add_subcommand("hunt", "search for violations of the sharp bounds");
  s_hunt->add_option("--scale", sargs.scale, "diagonal sweep up to this X (default 16)");
  s_hunt->add_option("--count", sargs.count, "structured instances (default 10000)");
  for (auto* sub : {s_ex, s_hunt}) sub->fallthrough();

  auto* verify = app.add_subcommand("verify", "self-check battery");
  verify->require_subcommand(1);
  auto* v_all = verify->add_subcommand("all", "run every check");
  v_all->fallthrough();

  std::ostringstream cli_out, cli_err;
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, cli_out, cli_err);
    out << cli_out.str();
    err << cli_err.str();
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    cfg.epsilon_given = app.count("--epsilon") > 0;
    cfg.p0_given = app.count("--p0") > 0;
    margs.lambda_given = lambda_opt->count() > 0;
    cfg.epsilon = parse_rational(cfg.epsilon_text);
    if (cfg.epsilon <= 0 || cfg.epsilon >= 1) {
      throw InvalidInput("--epsilon must lie strictly inside (0, 1), got " + cfg.epsilon_text);
    }
    std::optional<kernels::ScopedIsa> isa;
    if (cfg.isa == "scalar") isa.emplace(kernels::Isa::Scalar);
    if (cfg.isa == "avx2") isa.emplace(kernels::Isa::Avx2);

    Json rep;
    int code = kOk;
    if (*stats) {
      rep["command"] = "stats";
      rep["config"] = config_json(cfg);
      if (g_pre_command_hook) g_pre_command_hook(rep["command"].get<std::string>());
      code = cmd_stats(instance_path, cfg, rep);
    } else if (*structure) {
      rep["command"] = "structure";
      rep["config"] = config_json(cfg);
      if (g_pre_command_hook) g_pre_command_hook(rep["command"].get<std::string>());
      code = cmd_structure(instance_path, cfg, rep);
    } else if (*defect_cmd) {
      rep["command"] = "defect";
      rep["config"] = config_json(cfg);
      if (g_pre_command_hook) g_pre_command_hook(rep["command"].get<std::string>());
      code = cmd_defect(dargs, cfg, rep);
    } else if (*measure) {
      rep["command"] = "measure";
      rep["config"] = config_json(cfg);
      if (g_pre_command_hook) g_pre_command_hook(rep["command"].get<std::string>());
      code = cmd_measure(margs, cfg, rep);
    } else if (*family) {
      std::string which;
      for (auto* sub : {f_r2, f_r3, f_s5, f_sq}) {
        if (*sub) which = sub->get_name();
      }
      rep["command"] = "family " + which;
      rep["config"] = config_json(cfg);
      if (g_pre_command_hook) g_pre_command_hook(rep["command"].get<std::string>());
      code = cmd_family(which, fargs, cfg, rep);
    } else if (*search) {
      rep["command"] = *s_ex ? "search exhaustive" : "search hunt";
      rep["config"] = config_json(cfg);
      if (g_pre_command_hook) g_pre_command_hook(rep["command"].get<std::string>());
      code = *s_ex ? cmd_search_exhaustive(sargs, cfg, rep) : cmd_search_hunt(sargs, cfg, rep);
    } else if (*verify) {
      rep["command"] = "verify all";
      rep["config"] = config_json(cfg);
      if (g_pre_command_hook) g_pre_command_hook(rep["command"].get<std::string>());
      code = cmd_verify_all(cfg, rep);
    }
    rep["status"] = code == kOk ? "ok" : "violation";
    emit_report(rep, cfg, out);
    return code;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const ConsistencyFailure& e) {
    err << "internal consistency failure: " << e.what() << "\n";
    return kViolation;
  }
}

}  // namespace gcdlab::cli
