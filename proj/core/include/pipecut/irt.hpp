#ifndef PIPECUT_IRT_HPP
#define PIPECUT_IRT_HPP

#include <optional>
#include <variant>

#include "pipecut/common.hpp"
#include "pipecut/rng.hpp"
#include "pipecut/rollcall.hpp"

namespace pipecut {

// Latent state of the first module: a two-domain item-response model where
// legislator i holds ideal points beta0[i] (procedural) and beta1[i]
// (final passage), tied together exactly when the bridging bit zeta[i] is 1.
// Vote j has baseline mu[j] and discrimination alpha[j], the latter under a
// spike-and-slab prior with spike weight omega_alpha.
struct IrtState {
  Vector mu;     // J
  Vector alpha;  // J, exact zeros allowed
  double omega_alpha = 0.5;
  double kappa2_alpha = 1.0;
  double kappa2_mu = 1.0;
  double rho_mu = 0.0;
  double rho_beta = 0.0;
  double sigma2_beta = 1.0;
  Vector beta0;    // N
  Vector beta1;    // N
  IntVector zeta;  // N bits; zeta[i] = 1 implies beta0[i] == beta1[i]
  Matrix pg_aux;   // N x J, used at observed cells only
  long overflow_clamps = 0;

  bool finite() const;
};

// Prior over the bridging bits used by the sweep: either the exchangeable
// Beta-Binomial working prior or the logistic prior conditioned on the
// second module's current coefficients.
struct WorkingBetaBinomial {};

struct ConditionalLogistic {
  double eta0 = 0.0;
  Vector eta;  // K
  Matrix x;    // N x K covariates
};

using ZetaPrior = std::variant<WorkingBetaBinomial, ConditionalLogistic>;

// Log likelihood sum over observed cells of y * theta - log(1 + exp(theta))
// with theta = mu_j + alpha_j * beta_{i, w_j}.
double loglik(const IrtState& state, const RollCallData& data);

// Log prior density of the full state (latents plus hyperparameters) under
// the given zeta prior; point-mass components contribute their log weight.
double log_prior(const IrtState& state, const ZetaPrior& zprior);

struct IrtSweepOptions {
  bool update_pg = true;
  bool update_items = true;        // (mu_j, alpha_j) blocks
  bool update_legislators = true;  // (beta, zeta) blocks
  bool update_hyper = true;
};

// One full Gibbs sweep over the first module: Polya-Gamma auxiliaries,
// per-item (mu, alpha) spike-slab blocks, per-legislator (beta0, beta1,
// zeta) blocks with beta marginalized over both prior branches, then the
// conjugate hyperparameter conditionals.
void irt_sweep(IrtState& state, const RollCallData& data,
               const ZetaPrior& zprior, Rng& rng,
               const IrtSweepOptions& opts = {});

// Diffuse but proper start: mu, beta at 0, alpha at random signs, zeta at 1,
// hyperparameters at their prior means.
IrtState initial_irt_state(const RollCallData& data, Rng& rng);

// Synthetic roll-call generator.  Bridging bits come either from iid
// Bernoulli(bridge_frac) or, when covariates are supplied, from the logistic
// model with coefficients (eta0, eta).
struct RollCallSimSettings {
  Eigen::Index n_legislators = 50;
  Eigen::Index n_votes = 100;
  double final_passage_frac = 0.5;
  double bridge_frac = 0.5;
  double missing_frac = 0.0;
  double alpha_scale = 2.0;    // slab sd of true discriminations
  double alpha_spike = 0.1;    // fraction of zero discriminations
  double beta_sd = 1.0;
  double mu_sd = 0.5;
  bool draw_hyper_from_prior = false;
  std::optional<Matrix> covariates;  // N x K
  double eta0 = 0.0;
  Vector eta;  // K, used with covariates
};

struct RollCallSim {
  RollCallData data;
  IrtState truth;
};

RollCallSim simulate_rollcall(const RollCallSimSettings& settings, Rng& rng);

}  // namespace pipecut

#endif  // PIPECUT_IRT_HPP
