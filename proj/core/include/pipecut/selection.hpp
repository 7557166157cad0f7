#ifndef PIPECUT_SELECTION_HPP
#define PIPECUT_SELECTION_HPP

#include <Eigen/Dense>

#include "pipecut/common.hpp"
#include "pipecut/covariates.hpp"
#include "pipecut/rng.hpp"

namespace pipecut {

// State of the second module: logistic regression of the bridging bits on
// covariates with spike-and-slab selection.  eta[k] is exactly 0 whenever
// xi[k] is 0.  pg_aux holds the Polya-Gamma auxiliaries for the N bridging
// observations; pg_aux0 holds the two auxiliaries implementing the standard
// logistic prior on the intercept as one pseudo-success and one
// pseudo-failure at intercept-only design.
struct SelectState {
  IntVector xi;  // K bits
  double eta0 = 0.0;
  Vector eta;     // K
  Vector pg_aux;  // N
  Eigen::Vector2d pg_aux0{0.5, 0.5};
  long rank_rejections = 0;

  bool finite() const {
    return std::isfinite(eta0) && all_finite(eta) && all_finite(pg_aux);
  }
};

// 1 / (1 + exp(-(eta0 + x . eta))).
double bridge_prob(double eta0, const Vector& eta, const Vector& x);

// Beta-Bernoulli model prior log Gamma(s+1) Gamma(K-s+1) / Gamma(K+2) with
// s the number of included covariates.
double log_prior_xi(const IntVector& xi);

// Gaussian log density of the included block under the unit-information
// slab N(0, 4N (X_xi^T X_xi)^-1); zero-dimensional models return 0 and the
// excluded point masses contribute 0 by convention.
double log_prior_eta_given_xi(const Vector& eta, const IntVector& xi,
                              const CovariateMatrix& covs);

// Beta-Binomial working prior over the bridging bits.
double working_prior_logprob(const IntVector& zeta);

// One Metropolis-within-Gibbs sweep targeting p(xi, eta0, eta | zeta):
// refresh the PG auxiliaries, try a single flip of each xi_k in random scan
// order with (eta0, eta_xi) integrated out under the PG-Gaussian
// likelihood, then redraw (eta0, eta_xi) jointly from the exact Gaussian
// conditional.
void mwg_sweep(SelectState& state, const IntVector& zeta,
               const CovariateMatrix& covs, Rng& rng);

SelectState initial_select_state(Eigen::Index n, Eigen::Index k);

}  // namespace pipecut

#endif  // PIPECUT_SELECTION_HPP
