#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_app.hpp"
#include "doctest.h"
#include "gcdlab/errors.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using gcdlab::cli::run_cli;
using Json = nlohmann::ordered_json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("gcdlab_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& body) const {
    const fs::path p = path / name;
    std::ofstream(p) << body;
    return p.string();
  }
  std::string at(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kMultiples = R"({"A": ["100","110","120","130","140","150","160","170","180","190","200"],
 "B": ["100","110","120","130","140","150","160","170","180","190","200"],
 "X": "100", "Y": "100", "D": "10"})";

}  // namespace

TEST_CASE("stats") {
  TempDir tmp;
  const auto r = run({"stats", tmp.file("m.json", kMultiples)});
  CHECK(r.code == 0);
  const Json j = r.json();
  CHECK(j["command"] == "stats");
  CHECK(j["delta"] == "1");
  CHECK(j["omega_size"] == 121);
  CHECK(j["census"]["agree"] == true);
  CHECK(j["bound"]["holds"] == true);
  CHECK(j["status"] == "ok");

  const auto empty =
      run({"stats", tmp.file("e.json", R"({"A":["100"],"B":["101"],"X":"100","Y":"100","D":"50"})")});
  CHECK(empty.code == 0);
  CHECK(empty.json()["delta"] == "0");
  CHECK(empty.json()["bound"].contains("skipped"));

  const auto bad =
      run({"stats", tmp.file("b.json", R"({"A":["100","250"],"B":["100"],"X":"100","Y":"100","D":"2"})")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("A[1]") != std::string::npos);
  CHECK(bad.out.empty());
}

TEST_CASE("structure") {
  TempDir tmp;
  const auto r = run({"structure", tmp.file("m.json", kMultiples)});
  CHECK(r.code == 0);
  const Json j = r.json();
  CHECK(j["witness"]["holds"] == true);
  CHECK(j["omega_prime_size"].get<std::size_t>() >= 1);

  const auto one = run({"structure", tmp.file("s.json", R"({"A":["7"],"B":["7"],"X":"7","Y":"7","D":"7"})")});
  CHECK(one.code == 0);
  const Json js = one.json();
  CHECK(js["modulus"]["value"] == "7");
  CHECK(js["defects"][0]["plus"] == "1");
  CHECK(js["defects"][0]["minus"] == "1");
  CHECK(js["defects"][0]["star"] == "1");
  CHECK(js["witness"]["holds"] == true);

  const auto empty =
      run({"structure", tmp.file("e.json", R"({"A":["100"],"B":["101"],"X":"100","Y":"100","D":"50"})")});
  CHECK(empty.code == 2);
}

TEST_CASE("defect") {
  const auto r = run({"defect", "--n", "6", "--a", "12", "--b", "18"});
  CHECK(r.code == 0);
  const Json j = r.json();
  CHECK(j["a"]["star"] == "2");
  CHECK(j["b"]["star"] == "3");
  CHECK(j["pivotal"] == true);
  CHECK(j["quad"]["holds"] == true);
  CHECK(run({"defect", "--n", "6", "--a", "24"}).code == 2);
  CHECK(run({"defect", "--n", "6"}).code == 2);
}

TEST_CASE("family, measure and search commands") {
  const auto s5 = run({"family", "sec5", "--X", "4"});
  CHECK(s5.code == 0);
  CHECK(s5.json()["A"] == Json::array({"2", "3", "6", "12", "18"}));

  const auto m = run({"measure", "--point-mass", "0", "0", "--lambda", "0.5"});
  CHECK(m.code == 0);
  CHECK(m.json()["report"]["tail"] == 0.0);
  CHECK(m.json()["report"]["c_at_least_ninth"] == true);
  CHECK(run({"measure", "--point-mass", "0", "0", "--lambda", "0.9"}).code == 2);

  const auto s = run({"search", "exhaustive", "--X", "4", "--Y", "4", "--D", "2"});
  CHECK(s.code == 0);
  CHECK(s.json()["max_product"] == 9);
  CHECK(s.json()["best_a"] == Json::array({4, 6, 8}));
  CHECK(run({"--limit", "4", "search", "exhaustive", "--X", "20", "--D", "2"}).code == 2);
}

TEST_CASE("measure from a file and from an instance") {
  TempDir tmp;
  const double h = std::pow(2.0, -0.6);
  const Json body{
      {"mu", {{0, 0, 0.5}, {1, 1, 0.5}}}, {"x", {{0, h}, {1, h}}}, {"y", {{0, h}, {1, h}}}, {"lambda", 0.5}};
  const std::string in = tmp.file("mu.json", body.dump());
  const auto r = run({"measure", "--input", in});
  CHECK(r.code == 0);
  CHECK(r.json()["report"]["c"]["value"].get<double>() == doctest::Approx(std::pow(2.0, 0.2)).epsilon(1e-6));

  const auto v = run({"measure", "--instance", tmp.file("m.json", kMultiples), "--prime", "5"});
  CHECK(v.code == 0);
  CHECK(v.json()["report"]["tail"] == 0.0);
}

TEST_CASE("report round trips and determinism") {
  const std::vector<std::string> args{"search", "exhaustive", "--X", "6", "--D", "2"};
  const auto r = run(args);
  CHECK(r.json().dump(2) + "\n" == r.out);

  std::vector<std::string> csv_args{"--format", "csv"};
  csv_args.insert(csv_args.end(), args.begin(), args.end());
  const auto c = run(csv_args);
  CHECK(c.code == 0);
  const auto rows = gcdlab::cli::parse_csv_report(c.out);
  CHECK(gcdlab::cli::write_csv_report(rows) == c.out);
  bool found = false;
  for (const auto& [k, v] : rows) found = found || (k == "max_product" && v == "16");
  CHECK(found);

  const auto rows2 = gcdlab::cli::parse_csv_report("path,value\n\"a,b\",\"say \"\"hi\"\"\"\n");
  REQUIRE(rows2.size() == 1);
  CHECK(rows2[0].first == "a,b");
  CHECK(rows2[0].second == "say \"hi\"");
  CHECK(gcdlab::cli::parse_csv_report(gcdlab::cli::write_csv_report(rows2)) == rows2);

  const std::vector<std::string> hunt{"--seed", "9", "search", "hunt", "--scale", "6", "--count", "40"};
  const auto h1 = run(hunt);
  CHECK(h1.code == 0);
  CHECK(h1.out == run(hunt).out);
  CHECK(h1.json()["violations"].empty());
}

TEST_CASE("emitted sets read back") {
  TempDir tmp;
  const std::string f = tmp.at("r2.json");
  CHECK(run({"family", "remark2", "--X", "10", "--D", "3", "--emit-set", f}).code == 0);
  const auto st = run({"stats", f});
  CHECK(st.code == 0);
  CHECK(st.json()["delta"] == "1");
  CHECK(st.json()["omega_size"] == 9);

  const std::string g = tmp.at("s5.json");
  CHECK(run({"family", "sec5", "--X", "5", "--emit-set", g}).code == 0);
  CHECK(slurp(g).find("\"relaxed\": true") != std::string::npos);
  const auto rs = run({"stats", g});
  CHECK(rs.code == 0);
  CHECK(rs.json()["bound"].contains("skipped"));

  const std::string r3 = tmp.at("r3.json");
  CHECK(run({"family", "remark3", "--X", "40", "--D", "4", "--delta", "1/2", "--emit-set", r3}).code == 0);
  CHECK(run({"structure", r3}).code == 0);
}

TEST_CASE("exit codes") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"--epsilon", "2", "family", "sec5", "--X", "4"}).code == 2);
  CHECK(run({"--format", "xml", "family", "sec5", "--X", "4"}).code == 2);
  CHECK(run({"family", "sec5", "--X", "1"}).code == 2);
  CHECK(run({"search", "exhaustive", "--X", "4"}).code == 2);
  CHECK(run({"stats", "/nonexistent/instance.json"}).code == 2);

  // a consistency failure raised while a command runs exits 1
  gcdlab::cli::set_pre_command_hook([](const std::string& cmd) {
    if (cmd == "family sec5") throw gcdlab::ConsistencyFailure("injected");
  });
  const auto f = run({"family", "sec5", "--X", "4"});
  CHECK(f.code == 1);
  CHECK(f.err.find("injected") != std::string::npos);
  CHECK(run({"family", "remark2", "--X", "10", "--D", "3"}).code == 0);
  gcdlab::cli::set_pre_command_hook({});
  CHECK(run({"family", "sec5", "--X", "4"}).code == 0);
}

TEST_CASE("verify all") {
  const auto r = run({"verify", "all"});
  CHECK(r.code == 0);
  CHECK(r.json()["status"] == "ok");
}
