#include "pipecut/irt.hpp"

#include <cmath>
#include <numbers>

#include "pipecut/polya_gamma.hpp"

namespace pipecut {

namespace {

constexpr double kThetaClamp = 30.0;

double log_normal_pdf(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * r * r / var;
}

// Inverse gamma with shape a and scale b.
double log_inv_gamma_pdf(double x, double a, double b) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
}

double log_beta_binomial_bits(double sum, double n) {
  return std::lgamma(sum + 1.0) + std::lgamma(n - sum + 1.0) -
         std::lgamma(n + 2.0);
}

// log of int N(u; m0, v0) exp(r u - q u^2 / 2) du; the Gaussian evidence of
// a one-dimensional conjugate block.
double gaussian_evidence_1d(double r, double q, double m0, double v0) {
  const double prec = q + 1.0 / v0;
  const double h = r + m0 / v0;
  return -0.5 * std::log(v0) - 0.5 * std::log(prec) + 0.5 * h * h / prec -
         0.5 * m0 * m0 / v0;
}

}  // namespace

bool IrtState::finite() const {
  return all_finite(mu) && all_finite(alpha) && all_finite(beta0) &&
         all_finite(beta1) && std::isfinite(omega_alpha) &&
         std::isfinite(kappa2_alpha) && std::isfinite(kappa2_mu) &&
         std::isfinite(rho_mu) && std::isfinite(rho_beta) &&
         std::isfinite(sigma2_beta) && kappa2_alpha > 0.0 && kappa2_mu > 0.0 &&
         sigma2_beta > 0.0;
}

double loglik(const IrtState& state, const RollCallData& data) {
  if (state.mu.size() != data.j() || state.beta0.size() != data.n()) {
    throw InvalidInput("loglik: state dimensions do not match data");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.j(); ++j) {
      if (!data.observed(i, j)) continue;
      const double b =
          data.vote_type[j] == 1 ? state.beta1[i] : state.beta0[i];
      const double theta = state.mu[j] + state.alpha[j] * b;
      total += data.votes(i, j) * theta - log1p_exp(theta);
    }
  }
  return total;
}

double log_prior(const IrtState& state, const ZetaPrior& zprior) {
  const Eigen::Index n = state.beta0.size();
  const Eigen::Index j = state.mu.size();
  if (state.omega_alpha < 0.0 || state.omega_alpha > 1.0) {
    return -std::numeric_limits<double>::infinity();
  }
  double lp = 0.0;
  // Hyperpriors.
  lp += log_normal_pdf(state.rho_beta, 0.0, 1.0);
  lp += log_normal_pdf(state.rho_mu, 0.0, 1.0);
  lp += log_inv_gamma_pdf(state.sigma2_beta, 2.0, 1.0);
  lp += log_inv_gamma_pdf(state.kappa2_mu, 2.0, 1.0);
  lp += log_inv_gamma_pdf(state.kappa2_alpha, 2.0, 1.0);
  // omega_alpha ~ Uniform(0, 1): contributes 0.

  for (Eigen::Index jj = 0; jj < j; ++jj) {
    lp += log_normal_pdf(state.mu[jj], state.rho_mu, state.kappa2_mu);
    if (state.alpha[jj] == 0.0) {
      lp += std::log(state.omega_alpha);
    } else {
      lp += std::log1p(-state.omega_alpha) +
            log_normal_pdf(state.alpha[jj], 0.0, state.kappa2_alpha);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (state.zeta[i] == 1) {
      if (state.beta0[i] != state.beta1[i]) {
        return -std::numeric_limits<double>::infinity();
      }
      lp += log_normal_pdf(state.beta0[i], state.rho_beta, state.sigma2_beta);
    } else {
      lp += log_normal_pdf(state.beta0[i], state.rho_beta, state.sigma2_beta);
      lp += log_normal_pdf(state.beta1[i], state.rho_beta, state.sigma2_beta);
    }
  }
  if (std::holds_alternative<WorkingBetaBinomial>(zprior)) {
    lp += log_beta_binomial_bits(state.zeta.cast<double>().sum(),
                                 static_cast<double>(n));
  } else {
    const auto& cl = std::get<ConditionalLogistic>(zprior);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lin = cl.eta0 + cl.x.row(i).dot(cl.eta);
      lp += state.zeta[i] == 1 ? -log1p_exp(-lin) : -log1p_exp(lin);
    }
  }
  return lp;
}

void irt_sweep(IrtState& state, const RollCallData& data,
               const ZetaPrior& zprior, Rng& rng,
               const IrtSweepOptions& opts) {
  const Eigen::Index n = data.n();
  const Eigen::Index j = data.j();
  if (state.mu.size() != j || state.beta0.size() != n ||
      state.pg_aux.rows() != n || state.pg_aux.cols() != j) {
    throw InvalidInput("irt_sweep: state dimensions do not match data");
  }
  const auto* logistic = std::get_if<ConditionalLogistic>(&zprior);
  if (logistic &&
      (logistic->x.rows() != n || logistic->eta.size() != logistic->x.cols())) {
    throw InvalidInput("irt_sweep: conditional prior dimensions mismatch");
  }

  // (1) Polya-Gamma auxiliaries at observed cells.
  if (opts.update_pg) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index jj = 0; jj < j; ++jj) {
        if (!data.observed(i, jj)) continue;
        const double b =
            data.vote_type[jj] == 1 ? state.beta1[i] : state.beta0[i];
        double theta = state.mu[jj] + state.alpha[jj] * b;
        if (std::abs(theta) > kThetaClamp) {
          theta = theta > 0.0 ? kThetaClamp : -kThetaClamp;
          ++state.overflow_clamps;
        }
        state.pg_aux(i, jj) = sample_pg1(theta, rng);
      }
    }
  }

  // (2) Joint (mu_j, alpha_j) per vote: choose spike vs slab with both
  // coefficients integrated out, then draw from the selected Gaussian.
  if (opts.update_items) {
    for (Eigen::Index jj = 0; jj < j; ++jj) {
      double sw = 0.0, sk = 0.0, swb = 0.0, swb2 = 0.0, skb = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!data.observed(i, jj)) continue;
        const double om = state.pg_aux(i, jj);
        const double ka = data.votes(i, jj) - 0.5;
        const double b =
            data.vote_type[jj] == 1 ? state.beta1[i] : state.beta0[i];
        sw += om;
        sk += ka;
        swb += om * b;
        swb2 += om * b * b;
        skb += ka * b;
      }
      const double prior_prec_mu = 1.0 / state.kappa2_mu;
      const double prior_prec_alpha = 1.0 / state.kappa2_alpha;
      const double h_mu = sk + state.rho_mu * prior_prec_mu;

      // Spike: alpha_j = 0, only mu_j integrated.
      const double p0 = sw + prior_prec_mu;
      const double log_ev0 = -0.5 * std::log(state.kappa2_mu) -
                             0.5 * std::log(p0) + 0.5 * h_mu * h_mu / p0;

      // Slab: 2x2 block over (mu_j, alpha_j).
      const double p11 = sw + prior_prec_mu;
      const double p12 = swb;
      const double p22 = swb2 + prior_prec_alpha;
      const double det = p11 * p22 - p12 * p12;
      const double h_alpha = skb;
      const double quad = (p22 * h_mu * h_mu - 2.0 * p12 * h_mu * h_alpha +
                           p11 * h_alpha * h_alpha) /
                          det;
      const double log_ev1 =
          -0.5 * std::log(state.kappa2_mu * state.kappa2_alpha) -
          0.5 * std::log(det) + 0.5 * quad;

      const double log_odds_spike = std::log(state.omega_alpha) -
                                    std::log1p(-state.omega_alpha) + log_ev0 -
                                    log_ev1;
      if (rng.uniform() < sigmoid(log_odds_spike)) {
        state.alpha[jj] = 0.0;
        state.mu[jj] = h_mu / p0 + rng.normal() / std::sqrt(p0);
      } else {
        // Draw (mu, alpha) ~ N(P^-1 h, P^-1) via the 2x2 Cholesky of P.
        const double l11 = std::sqrt(p11);
        const double l21 = p12 / l11;
        const double l22 = std::sqrt(p22 - l21 * l21);
        const double m_mu = (p22 * h_mu - p12 * h_alpha) / det;
        const double m_alpha = (p11 * h_alpha - p12 * h_mu) / det;
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        // Solve L^T u = z.
        const double u2 = z2 / l22;
        const double u1 = (z1 - l21 * u2) / l11;
        state.mu[jj] = m_mu + u1;
        state.alpha[jj] = m_alpha + u2;
      }
    }
  }

  // (3) Per-legislator (beta0, beta1, zeta): the bridging bit is drawn with
  // beta marginalized over both prior branches against the PG-Gaussianized
  // likelihood, then beta comes from the selected branch's conditional.
  if (opts.update_legislators) {
    double zeta_sum = state.zeta.cast<double>().sum();
    for (Eigen::Index i = 0; i < n; ++i) {
      double r[2] = {0.0, 0.0};
      double q[2] = {0.0, 0.0};
      for (Eigen::Index jj = 0; jj < j; ++jj) {
        if (!data.observed(i, jj)) continue;
        const int d = data.vote_type[jj];
        const double om = state.pg_aux(i, jj);
        const double ka = data.votes(i, jj) - 0.5;
        r[d] += state.alpha[jj] * (ka - om * state.mu[jj]);
        q[d] += om * state.alpha[jj] * state.alpha[jj];
      }
      double prior_logit;
      if (logistic) {
        prior_logit = logistic->eta0 + logistic->x.row(i).dot(logistic->eta);
      } else {
        const double s_minus = zeta_sum - state.zeta[i];
        prior_logit = std::log(s_minus + 1.0) -
                      std::log(static_cast<double>(n) - s_minus);
      }
      const double log_ev_bridge = gaussian_evidence_1d(
          r[0] + r[1], q[0] + q[1], state.rho_beta, state.sigma2_beta);
      const double log_ev_split =
          gaussian_evidence_1d(r[0], q[0], state.rho_beta, state.sigma2_beta) +
          gaussian_evidence_1d(r[1], q[1], state.rho_beta, state.sigma2_beta);
      const double p1 = sigmoid(prior_logit + log_ev_bridge - log_ev_split);

      zeta_sum -= state.zeta[i];
      if (rng.uniform() < p1) {
        state.zeta[i] = 1;
        const double prec = q[0] + q[1] + 1.0 / state.sigma2_beta;
        const double h =
            r[0] + r[1] + state.rho_beta / state.sigma2_beta;
        const double b = h / prec + rng.normal() / std::sqrt(prec);
        state.beta0[i] = b;
        state.beta1[i] = b;
      } else {
        state.zeta[i] = 0;
        for (int d = 0; d < 2; ++d) {
          const double prec = q[d] + 1.0 / state.sigma2_beta;
          const double h = r[d] + state.rho_beta / state.sigma2_beta;
          const double b = h / prec + rng.normal() / std::sqrt(prec);
          (d == 0 ? state.beta0[i] : state.beta1[i]) = b;
        }
      }
      zeta_sum += state.zeta[i];
    }
  }

  // (4) Hyperparameters from their conjugate conditionals.  Bridged
  // legislators contribute a single beta factor, split ones two.
  if (opts.update_hyper) {
    double n_b = 0.0, sum_b = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      n_b += 1.0;
      sum_b += state.beta0[i];
      if (state.zeta[i] == 0) {
        n_b += 1.0;
        sum_b += state.beta1[i];
      }
    }
    {
      const double prec = 1.0 + n_b / state.sigma2_beta;
      const double mean = (sum_b / state.sigma2_beta) / prec;
      state.rho_beta = mean + rng.normal() / std::sqrt(prec);
    }
    {
      double ss = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double r0 = state.beta0[i] - state.rho_beta;
        ss += r0 * r0;
        if (state.zeta[i] == 0) {
          const double r1 = state.beta1[i] - state.rho_beta;
          ss += r1 * r1;
        }
      }
      state.sigma2_beta = rng.inv_gamma(2.0 + 0.5 * n_b, 1.0 + 0.5 * ss);
    }
    {
      const double jd = static_cast<double>(j);
      const double prec = 1.0 + jd / state.kappa2_mu;
      const double mean = (state.mu.sum() / state.kappa2_mu) / prec;
      state.rho_mu = mean + rng.normal() / std::sqrt(prec);
      const double ss = (state.mu.array() - state.rho_mu).square().sum();
      state.kappa2_mu = rng.inv_gamma(2.0 + 0.5 * jd, 1.0 + 0.5 * ss);
    }
    {
      double n_slab = 0.0, ss = 0.0;
      for (Eigen::Index jj = 0; jj < j; ++jj) {
        if (state.alpha[jj] != 0.0) {
          n_slab += 1.0;
          ss += state.alpha[jj] * state.alpha[jj];
        }
      }
      state.kappa2_alpha = rng.inv_gamma(2.0 + 0.5 * n_slab, 1.0 + 0.5 * ss);
      const double n_spike = static_cast<double>(j) - n_slab;
      state.omega_alpha = rng.beta(1.0 + n_spike, 1.0 + n_slab);
    }
  }
}

IrtState initial_irt_state(const RollCallData& data, Rng& rng) {
  IrtState s;
  s.mu = Vector::Zero(data.j());
  s.alpha = Vector(data.j());
  for (Eigen::Index jj = 0; jj < data.j(); ++jj) {
    s.alpha[jj] = rng.uniform() < 0.5 ? 1.0 : -1.0;
  }
  s.beta0 = Vector::Zero(data.n());
  s.beta1 = Vector::Zero(data.n());
  s.zeta = IntVector::Ones(data.n());
  s.pg_aux = Matrix::Zero(data.n(), data.j());
  return s;
}

RollCallSim simulate_rollcall(const RollCallSimSettings& st, Rng& rng) {
  if (st.n_legislators < 2 || st.n_votes < 2) {
    throw InvalidInput("simulate_rollcall: need at least 2 legislators and 2 votes");
  }
  if (st.final_passage_frac < 0.0 || st.final_passage_frac > 1.0 ||
      st.bridge_frac < 0.0 || st.bridge_frac > 1.0 || st.missing_frac < 0.0 ||
      st.missing_frac >= 1.0) {
    throw InvalidInput("simulate_rollcall: fractions out of range");
  }
  if (st.covariates &&
      (st.covariates->rows() != st.n_legislators ||
       st.eta.size() != st.covariates->cols())) {
    throw InvalidInput("simulate_rollcall: covariate dimensions mismatch");
  }
  const Eigen::Index n = st.n_legislators;
  const Eigen::Index j = st.n_votes;

  IrtState truth;
  if (st.draw_hyper_from_prior) {
    truth.rho_beta = rng.normal();
    truth.sigma2_beta = rng.inv_gamma(2.0, 1.0);
    truth.rho_mu = rng.normal();
    truth.kappa2_mu = rng.inv_gamma(2.0, 1.0);
    truth.kappa2_alpha = rng.inv_gamma(2.0, 1.0);
    truth.omega_alpha = rng.uniform();
  } else {
    truth.rho_beta = 0.0;
    truth.sigma2_beta = st.beta_sd * st.beta_sd;
    truth.rho_mu = 0.0;
    truth.kappa2_mu = st.mu_sd * st.mu_sd;
    truth.kappa2_alpha = st.alpha_scale * st.alpha_scale;
    truth.omega_alpha = st.alpha_spike;
  }

  IntVector vote_type(j);
  for (Eigen::Index jj = 0; jj < j; ++jj) {
    vote_type[jj] = rng.uniform() < st.final_passage_frac ? 1 : 0;
  }
  // Both domains must be present.
  if ((vote_type.array() == 1).count() == 0) vote_type[j - 1] = 1;
  if ((vote_type.array() == 0).count() == 0) vote_type[0] = 0;

  truth.zeta = IntVector(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p1 = st.bridge_frac;
    if (st.covariates) {
      p1 = sigmoid(st.eta0 + st.covariates->row(i).dot(st.eta));
    }
    truth.zeta[i] = rng.uniform() < p1 ? 1 : 0;
  }

  truth.beta0 = Vector(n);
  truth.beta1 = Vector(n);
  const double beta_sd = std::sqrt(truth.sigma2_beta);
  for (Eigen::Index i = 0; i < n; ++i) {
    truth.beta0[i] = truth.rho_beta + beta_sd * rng.normal();
    truth.beta1[i] = truth.zeta[i] == 1
                         ? truth.beta0[i]
                         : truth.rho_beta + beta_sd * rng.normal();
  }

  truth.mu = Vector(j);
  truth.alpha = Vector(j);
  const double mu_sd = std::sqrt(truth.kappa2_mu);
  const double alpha_sd = std::sqrt(truth.kappa2_alpha);
  for (Eigen::Index jj = 0; jj < j; ++jj) {
    truth.mu[jj] = truth.rho_mu + mu_sd * rng.normal();
    truth.alpha[jj] = rng.uniform() < truth.omega_alpha ? 0.0 : alpha_sd * rng.normal();
  }

  IntMatrix votes(n, j);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index jj = 0; jj < j; ++jj) {
      const double b = vote_type[jj] == 1 ? truth.beta1[i] : truth.beta0[i];
      const double p = sigmoid(truth.mu[jj] + truth.alpha[jj] * b);
      int y = rng.uniform() < p ? 1 : 0;
      if (st.missing_frac > 0.0 && rng.uniform() < st.missing_frac) y = -1;
      votes(i, jj) = y;
    }
  }
  // Masking may have emptied a row or column; unmask the first cell there.
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((votes.row(i).array() >= 0).count() == 0) votes(i, 0) = 0;
  }
  for (Eigen::Index jj = 0; jj < j; ++jj) {
    if ((votes.col(jj).array() >= 0).count() == 0) votes(0, jj) = 0;
  }

  truth.pg_aux = Matrix::Zero(n, j);
  RollCallSim sim;
  sim.data = RollCallData::validated(std::move(votes), std::move(vote_type));
  sim.truth = std::move(truth);
  return sim;
}

}  // namespace pipecut
