#include "tail_calibration.hpp"

#include <algorithm>

#include "gcdlab/measure.hpp"

namespace gcdlab {

TailSweep tail_sweep(std::uint64_t seed, std::uint64_t per_lambda, std::uint64_t random_draws,
                     const Rational& epsilon) {
  const double qp = Rational((2 + epsilon) / (1 + epsilon)).get_d();
  Rng rng(seed);
  TailSweep s;
  for (double lambda : kTailLambdaGrid) {
    for (std::uint64_t i = 0; i < per_lambda; ++i) {
      auto cfg = saturated_configuration(rng, lambda, qp);
      if (!cfg) {
        ++s.skipped;
        continue;
      }
      const auto r = concentration_report(cfg->mu, cfg->weights, Interval::point(lambda), epsilon);
      ++s.configurations;
      s.max_c = std::max(s.max_c, r.c.value);
      s.saturated_max_ratio = std::max(s.saturated_max_ratio, r.ratio);
      if (r.ratio > s.max_ratio) {
        s.max_ratio = r.ratio;
        s.worst_lambda = lambda;
      }
    }
  }
  for (std::uint64_t i = 0; i < random_draws; ++i) {
    const Configuration cfg = random_configuration(rng, qp);
    ++s.random_drawn;
    const auto r = concentration_report(cfg.mu, cfg.weights, Interval::point(cfg.lambda), epsilon);
    if (r.c.enclosure.lo > 1.0) continue;
    ++s.random_kept;
    s.max_c = std::max(s.max_c, r.c.value);
    s.random_max_ratio = std::max(s.random_max_ratio, r.ratio);
    if (r.ratio > s.max_ratio) {
      s.max_ratio = r.ratio;
      s.worst_lambda = cfg.lambda;
    }
  }
  return s;
}

}  // namespace gcdlab
