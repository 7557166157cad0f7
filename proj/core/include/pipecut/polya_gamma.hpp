#ifndef PIPECUT_POLYA_GAMMA_HPP
#define PIPECUT_POLYA_GAMMA_HPP

#include "pipecut/common.hpp"
#include "pipecut/rng.hpp"

namespace pipecut {

// Polya-Gamma distribution PG(b, c) with positive integer shape b and real
// tilt c.  b = 1 uses the exact alternating-series accept/reject sampler;
// integer b > 1 draws are sums of b independent PG(1, c) variables.
struct PGParams {
  int b;
  double c;

  PGParams(int b_, double c_) : b(b_), c(c_) {
    if (b < 1) throw InvalidInput("PG shape b must be a positive integer");
    if (!std::isfinite(c)) throw InvalidInput("PG tilt c must be finite");
  }
};

// Exact draw from PG(1, c); strictly positive.
double sample_pg1(double c, Rng& rng);

double sample_pg(const PGParams& p, Rng& rng);

// E[PG(b, c)] = (b / 2c) tanh(c / 2), with the analytic limit b/4 at c = 0.
double mean_pg(const PGParams& p);

}  // namespace pipecut

#endif  // PIPECUT_POLYA_GAMMA_HPP
