#include "pipecut/polya_gamma.hpp"

#include <cmath>
#include <numbers>

namespace pipecut {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTrunc = 0.64;  // series crossover point

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// P(IG(1/z, 1) <= x) for z >= 0; the z = 0 limit is the Levy CDF.
double inverse_gaussian_cdf(double x, double z) {
  const double rx = 1.0 / std::sqrt(x);
  const double b = rx * (x * z - 1.0);
  const double a = -rx * (x * z + 1.0);
  return normal_cdf(b) + std::exp(2.0 * z + std::log(normal_cdf(a)));
}

// Coefficients of the alternating series for the J*(1, z) density.
double series_coef(int n, double x) {
  const double h = n + 0.5;
  if (x <= kTrunc) {
    return kPi * h * std::pow(2.0 / (kPi * x), 1.5) * std::exp(-2.0 * h * h / x);
  }
  return kPi * h * std::exp(-0.5 * h * h * kPi * kPi * x);
}

// Inverse Gaussian IG(mu = 1/z, lambda = 1) truncated to (0, kTrunc].
double truncated_inverse_gaussian(double z, Rng& rng) {
  const double t = kTrunc;
  if (z < 1.0 / t) {
    // mu > t: rejection from the z = 0 body with an exp(-z^2 x / 2) thinning.
    for (;;) {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / t);
      const double x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      if (rng.uniform() <= std::exp(-0.5 * z * z * x)) return x;
    }
  }
  const double mu = 1.0 / z;
  for (;;) {
    const double nu = rng.normal();
    const double y = nu * nu;
    double x = mu + 0.5 * mu * mu * y -
               0.5 * mu * std::sqrt(4.0 * mu * y + mu * mu * y * y);
    if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    if (x <= t) return x;
  }
}

}  // namespace

double sample_pg1(double c, Rng& rng) {
  // PG(1, c) = J*(1, |c|/2) / 4 via the Devroye-style alternating series.
  const double z = 0.5 * std::abs(c);
  const double k = kPi * kPi / 8.0 + 0.5 * z * z;
  const double p_exp = (kPi / (2.0 * k)) * std::exp(-k * kTrunc);
  const double p_ig = 2.0 * std::exp(-z) * inverse_gaussian_cdf(kTrunc, z);
  const double tail_prob = p_exp / (p_exp + p_ig);

  for (;;) {
    double x;
    if (rng.uniform() < tail_prob) {
      x = kTrunc + rng.exponential() / k;
    } else {
      x = truncated_inverse_gaussian(z, rng);
    }
    double s = series_coef(0, x);
    double y = rng.uniform() * s;
    for (int n = 1;; ++n) {
      if (n & 1) {
        s -= series_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += series_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

double sample_pg(const PGParams& p, Rng& rng) {
  double sum = 0.0;
  for (int i = 0; i < p.b; ++i) sum += sample_pg1(p.c, rng);
  return sum;
}

double mean_pg(const PGParams& p) {
  // The ratio is 0/0 at c = 0; use the analytic limit b/4 near it.
  if (std::abs(p.c) < 1e-8) return 0.25 * p.b;
  return (p.b / (2.0 * p.c)) * std::tanh(0.5 * p.c);
}

}  // namespace pipecut
