// Writes the frozen tail constant K used by the acceptance suite.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tail_calibration.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Calibrate the tail constant K"};
  std::uint64_t seed = 20240601;
  std::uint64_t per_lambda = 40000;
  std::uint64_t random_draws = 2000000;
  double margin = 2.0;
  std::string out = "tail_constant.json";
  app.add_option("--seed", seed);
  app.add_option("--per-lambda", per_lambda);
  app.add_option("--random", random_draws, "random configurations drawn (kept when c <= 1)");
  app.add_option("--margin", margin, "K = margin * largest observed ratio");
  app.add_option("--out", out);
  CLI11_PARSE(app, argc, argv);

  const auto s = gcdlab::tail_sweep(seed, per_lambda, random_draws, gcdlab::Rational(1, 2));
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["epsilon"] = "1/2";
  j["lambda_grid"] = gcdlab::kTailLambdaGrid;
  j["per_lambda"] = per_lambda;
  j["configurations"] = s.configurations;
  j["skipped"] = s.skipped;
  j["random_drawn"] = s.random_drawn;
  j["random_kept"] = s.random_kept;
  j["saturated_max_ratio"] = s.saturated_max_ratio;
  j["random_max_ratio"] = s.random_max_ratio;
  j["max_ratio"] = s.max_ratio;
  j["worst_lambda"] = s.worst_lambda;
  j["max_c"] = s.max_c;
  j["margin"] = margin;
  j["K"] = margin * s.max_ratio;
  std::ofstream f(out);
  f << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";
  return 0;
}
