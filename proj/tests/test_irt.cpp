#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pipecut/covariates.hpp"
#include "pipecut/irt.hpp"
#include "pipecut/rng.hpp"
#include "pipecut/selection.hpp"
#include "testutil.hpp"

using pipecut::ConditionalLogistic;
using pipecut::IntMatrix;
using pipecut::IntVector;
using pipecut::IrtState;
using pipecut::IrtSweepOptions;
using pipecut::Matrix;
using pipecut::RollCallData;
using pipecut::RollCallSimSettings;
using pipecut::Rng;
using pipecut::Vector;
using pipecut::WorkingBetaBinomial;
using pipecut::ZetaPrior;

namespace {

RollCallData tiny_data() {
  IntMatrix votes(3, 4);
  votes << 1, 0, 1, 0,
           0, 1, 1, 1,
           1, 1, 0, 0;
  IntVector w(4);
  w << 0, 1, 0, 1;
  return RollCallData::validated(votes, w);
}

}  // namespace

TEST_CASE("loglik closed-form examples") {
  SUBCASE("flat state gives cells * log(1/2)") {
    auto data = tiny_data();
    Rng rng(1);
    IrtState s = initial_irt_state(data, rng);
    s.alpha.setZero();
    CHECK(loglik(s, data) ==
          doctest::Approx(12.0 * std::log(0.5)).epsilon(1e-12));
  }
  SUBCASE("simultaneous sign flip leaves the likelihood unchanged") {
    auto data = tiny_data();
    Rng rng(2);
    IrtState s = initial_irt_state(data, rng);
    for (Eigen::Index i = 0; i < 3; ++i) {
      s.beta0[i] = rng.normal();
      s.beta1[i] = rng.normal();
      s.zeta[i] = 0;
    }
    for (Eigen::Index j = 0; j < 4; ++j) {
      s.mu[j] = rng.normal();
      s.alpha[j] = rng.normal();
    }
    IrtState f = s;
    f.alpha = -f.alpha;
    f.beta0 = -f.beta0;
    f.beta1 = -f.beta1;
    CHECK(loglik(s, data) == doctest::Approx(loglik(f, data)).epsilon(1e-12));
  }
  SUBCASE("single-cell value") {
    IntMatrix votes(2, 2);
    votes << 1, -1, -1, 0;
    IntVector w(2);
    w << 0, 1;
    auto data = RollCallData::validated(votes, w);
    Rng rng(3);
    IrtState s = initial_irt_state(data, rng);
    s.mu << 1.0, 0.0;
    s.alpha << 1.0, 0.0;
    s.beta0 << 0.5, 0.0;
    s.beta1 = s.beta0;
    // Cell (0,0): theta = 1 + 1 * 0.5, y = 1.  Cell (1,1): theta = 0, y = 0.
    const double expected = -std::log(1.0 + std::exp(-1.5)) + std::log(0.5);
    CHECK(loglik(s, data) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("log_prior + loglik is invariant under the joint sign flip") {
  auto data = tiny_data();
  Rng rng(5);
  IrtState s = initial_irt_state(data, rng);
  for (Eigen::Index i = 0; i < 3; ++i) {
    s.beta0[i] = rng.normal();
    s.beta1[i] = s.beta0[i];
  }
  s.zeta.setOnes();
  s.zeta[1] = 0;
  s.beta1[1] = rng.normal();
  s.alpha << 0.7, 0.0, -1.2, 0.4;
  s.mu << 0.1, -0.2, 0.6, 0.0;
  s.rho_beta = 0.8;
  const ZetaPrior prior = WorkingBetaBinomial{};

  IrtState f = s;
  f.alpha = -f.alpha;
  f.beta0 = -f.beta0;
  f.beta1 = -f.beta1;
  f.rho_beta = -f.rho_beta;
  const double a = log_prior(s, prior) + loglik(s, data);
  const double b = log_prior(f, prior) + loglik(f, data);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("sweep maintains the bridge equality invariant") {
  auto data = tiny_data();
  Rng rng(7);
  IrtState s = initial_irt_state(data, rng);
  for (int it = 0; it < 500; ++it) {
    irt_sweep(s, data, WorkingBetaBinomial{}, rng);
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      REQUIRE((s.zeta[i] == 0 || s.zeta[i] == 1));
      if (s.zeta[i] == 1) REQUIRE(s.beta0[i] == s.beta1[i]);
    }
  }
}

TEST_CASE("beta recovers its prior when discriminations are pinned at zero") {
  // With alpha = 0 the likelihood is flat in beta, so the per-sweep beta
  // draws are iid from N(rho_beta, sigma2_beta) at fixed hyperparameters.
  auto data = tiny_data();
  Rng rng(11);
  IrtState s = initial_irt_state(data, rng);
  s.alpha.setZero();
  s.rho_beta = 0.4;
  s.sigma2_beta = 1.7;
  IrtSweepOptions opts;
  opts.update_items = false;
  opts.update_hyper = false;

  std::vector<double> draws;
  const int sweeps = 10000;
  for (int it = 0; it < sweeps; ++it) {
    irt_sweep(s, data, WorkingBetaBinomial{}, rng, opts);
    draws.push_back(s.beta0[0]);
  }
  const double m = testutil::mean_of(draws);
  const double v = testutil::variance_of(draws);
  const double se_mean = std::sqrt(1.7 / sweeps);
  const double se_var = 1.7 * std::sqrt(2.0 / sweeps);
  CHECK(std::abs(m - 0.4) < 3.0 * se_mean);
  CHECK(std::abs(v - 1.7) < 3.0 * se_var);
}

TEST_CASE("hyperprior conformance with the likelihood disabled") {
  // All-missing data turns every conditional into its prior; 10^4 sweeps
  // should reproduce the hyperprior moments.  The inverse-gamma(2, 1)
  // variance is infinite, so that check runs on the log scale where
  // E log X = -psi(2) and Var log X = psi'(2).
  RollCallData data;
  data.votes = IntMatrix::Constant(4, 5, -1);
  data.vote_type = IntVector::Zero(5);
  data.vote_type[1] = 1;

  Rng rng(13);
  IrtState s = initial_irt_state(data, rng);
  const int sweeps = 10000;
  std::vector<double> log_s2b, omega, rho;
  for (int it = 0; it < sweeps; ++it) {
    irt_sweep(s, data, WorkingBetaBinomial{}, rng);
    log_s2b.push_back(std::log(s.sigma2_beta));
    omega.push_back(s.omega_alpha);
    rho.push_back(s.rho_beta);
  }
  const double digamma_2 = 1.0 - 0.57721566490153286;
  const double trigamma_2 = std::numbers::pi * std::numbers::pi / 6.0 - 1.0;

  CHECK(std::abs(testutil::mean_of(log_s2b) + digamma_2) <
        3.0 * testutil::batch_means_se(log_s2b));
  CHECK(std::abs(testutil::variance_of(log_s2b) - trigamma_2) < 0.08);
  CHECK(std::abs(testutil::mean_of(omega) - 0.5) <
        3.0 * testutil::batch_means_se(omega));
  CHECK(std::abs(testutil::variance_of(omega) - 1.0 / 12.0) < 0.01);
  CHECK(std::abs(testutil::mean_of(rho)) < 3.0 * testutil::batch_means_se(rho));
}

TEST_CASE("simulate_rollcall basics") {
  SUBCASE("bridge fraction one forces all bridges") {
    RollCallSimSettings st;
    st.n_legislators = 20;
    st.n_votes = 10;
    st.bridge_frac = 1.0;
    Rng rng(17);
    const auto sim = simulate_rollcall(st, rng);
    CHECK(sim.truth.zeta.sum() == 20);
    CHECK(sim.truth.beta0 == sim.truth.beta1);
  }
  SUBCASE("same seed, identical data") {
    RollCallSimSettings st;
    st.n_legislators = 8;
    st.n_votes = 6;
    st.missing_frac = 0.2;
    Rng r1(19), r2(19);
    const auto a = simulate_rollcall(st, r1);
    const auto b = simulate_rollcall(st, r2);
    CHECK(a.data.votes == b.data.votes);
    CHECK(a.data.vote_type == b.data.vote_type);
  }
  SUBCASE("degenerate settings rejected") {
    RollCallSimSettings st;
    st.n_legislators = 1;
    Rng rng(23);
    CHECK_THROWS_AS(simulate_rollcall(st, rng), pipecut::InvalidInput);
  }
}

TEST_CASE("working posterior recovers strong synthetic ideal points") {
  RollCallSimSettings st;
  st.n_legislators = 50;
  st.n_votes = 200;
  st.bridge_frac = 0.6;
  st.alpha_scale = 2.5;
  st.alpha_spike = 0.05;
  Rng gen(29);
  const auto sim = simulate_rollcall(st, gen);

  Rng rng(31);
  IrtState s = initial_irt_state(sim.data, rng);
  const int burn = 1000, keep = 4000;
  Vector mean_beta0 = Vector::Zero(sim.data.n());
  for (int it = 0; it < burn + keep; ++it) {
    irt_sweep(s, sim.data, WorkingBetaBinomial{}, rng);
    if (it >= burn) mean_beta0 += s.beta0;
  }
  mean_beta0 /= keep;

  const Vector& truth = sim.truth.beta0;
  const double mx = mean_beta0.mean(), mt = truth.mean();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    sxy += (mean_beta0[i] - mx) * (truth[i] - mt);
    sxx += (mean_beta0[i] - mx) * (mean_beta0[i] - mx);
    syy += (truth[i] - mt) * (truth[i] - mt);
  }
  const double r = sxy / std::sqrt(sxx * syy);
  CHECK(std::abs(r) > 0.9);
}

// ---------------------------------------------------------------------------
// Geweke joint-distribution tests: the forward (marginal-conditional)
// simulator and the Gibbs (successive-conditional) simulator must agree on
// the joint distribution over (parameters, data).
// ---------------------------------------------------------------------------

namespace {

struct GewekeAccum {
  std::vector<std::vector<double>> stats;
  explicit GewekeAccum(std::size_t k) : stats(k) {}
  void push(const std::vector<double>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) stats[i].push_back(row[i]);
  }
};

IrtState forward_first_module(const RollCallData& data, const Vector& p_bridge,
                              Rng& rng) {
  IrtState s;
  const Eigen::Index n = data.n(), j = data.j();
  s.rho_beta = rng.normal();
  s.sigma2_beta = rng.inv_gamma(2.0, 1.0);
  s.rho_mu = rng.normal();
  s.kappa2_mu = rng.inv_gamma(2.0, 1.0);
  s.kappa2_alpha = rng.inv_gamma(2.0, 1.0);
  s.omega_alpha = rng.uniform();
  s.zeta = IntVector(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.zeta[i] = rng.bernoulli(p_bridge[i]) ? 1 : 0;
  }
  s.beta0 = Vector(n);
  s.beta1 = Vector(n);
  const double sd_b = std::sqrt(s.sigma2_beta);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.beta0[i] = s.rho_beta + sd_b * rng.normal();
    s.beta1[i] = s.zeta[i] == 1 ? s.beta0[i] : s.rho_beta + sd_b * rng.normal();
  }
  s.mu = Vector(j);
  s.alpha = Vector(j);
  for (Eigen::Index jj = 0; jj < j; ++jj) {
    s.mu[jj] = s.rho_mu + std::sqrt(s.kappa2_mu) * rng.normal();
    s.alpha[jj] = rng.uniform() < s.omega_alpha
                      ? 0.0
                      : std::sqrt(s.kappa2_alpha) * rng.normal();
  }
  s.pg_aux = Matrix::Zero(n, j);
  return s;
}

void sample_votes_in_place(RollCallData& data, const IrtState& s, Rng& rng) {
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index jj = 0; jj < data.j(); ++jj) {
      if (!data.observed(i, jj)) continue;
      const double b = data.vote_type[jj] == 1 ? s.beta1[i] : s.beta0[i];
      const double p = pipecut::sigmoid(s.mu[jj] + s.alpha[jj] * b);
      data.votes(i, jj) = rng.bernoulli(p) ? 1 : 0;
    }
  }
}

std::vector<double> tracked_stats(const IrtState& s, const RollCallData& data) {
  double yea = 0.0, cells = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index jj = 0; jj < data.j(); ++jj) {
      if (!data.observed(i, jj)) continue;
      cells += 1.0;
      yea += data.votes(i, jj);
    }
  }
  return {s.rho_mu,
          s.rho_beta,
          std::log(s.sigma2_beta),
          std::log(s.kappa2_mu),
          std::log(s.kappa2_alpha),
          s.omega_alpha,
          s.zeta.cast<double>().sum(),
          s.beta0.mean(),
          s.mu.mean(),
          yea / cells};
}

void check_geweke(const GewekeAccum& fwd, const GewekeAccum& mc,
                  const std::vector<std::string>& names) {
  for (std::size_t k = 0; k < fwd.stats.size(); ++k) {
    const double m1 = testutil::mean_of(fwd.stats[k]);
    const double se1 = std::sqrt(testutil::variance_of(fwd.stats[k]) /
                                 static_cast<double>(fwd.stats[k].size()));
    const double m2 = testutil::mean_of(mc.stats[k]);
    const double se2 = testutil::batch_means_se(mc.stats[k]);
    const double z = (m1 - m2) / std::sqrt(se1 * se1 + se2 * se2);
    INFO("statistic ", names[k], ": z = ", z);
    CHECK(std::abs(z) < 3.2905);  // two-sided 0.001
  }
}

const std::vector<std::string> kStatNames = {
    "rho_mu",           "rho_beta",    "log_sigma2_beta", "log_kappa2_mu",
    "log_kappa2_alpha", "omega_alpha", "sum_zeta",        "mean_beta0",
    "mean_mu",          "frac_yea"};

}  // namespace

TEST_CASE("Geweke test: working-prior Gibbs sweep") {
  // N = 3, J = 4, one missing cell; the Beta-Binomial working prior is the
  // uniform-probability mixture, sampled hierarchically in the forward pass.
  IntMatrix votes(3, 4);
  votes.setZero();
  votes(0, 0) = -1;
  IntVector w(4);
  w << 0, 1, 0, 1;
  RollCallData data = RollCallData::validated(votes, w);

  const int m1 = 60000;
  const int m2 = 240000;
  GewekeAccum fwd(10), mc(10);

  {
    Rng rng(101);
    for (int it = 0; it < m1; ++it) {
      const double p = rng.uniform();
      IrtState s = forward_first_module(data, Vector::Constant(3, p), rng);
      sample_votes_in_place(data, s, rng);
      fwd.push(tracked_stats(s, data));
    }
  }
  {
    Rng rng(102);
    const double p = rng.uniform();
    IrtState s = forward_first_module(data, Vector::Constant(3, p), rng);
    sample_votes_in_place(data, s, rng);
    for (int it = 0; it < m2; ++it) {
      irt_sweep(s, data, WorkingBetaBinomial{}, rng);
      sample_votes_in_place(data, s, rng);
      mc.push(tracked_stats(s, data));
    }
    CHECK(s.overflow_clamps < m2 / 100);
  }
  check_geweke(fwd, mc, kStatNames);
}

TEST_CASE("Geweke test: full pipeline with the conditional logistic prior") {
  IntMatrix votes(3, 4);
  votes.setZero();
  IntVector w(4);
  w << 0, 1, 1, 0;
  RollCallData data = RollCallData::validated(votes, w);

  Matrix xraw(3, 1);
  xraw << -1.0, 0.2, 1.1;
  const auto covs = pipecut::CovariateMatrix::validated(xraw, {"x1"}, true);
  const double slab_var = 4.0 * 3.0 / covs.x.col(0).squaredNorm();

  const int m1 = 60000;
  const int m2 = 240000;
  GewekeAccum fwd(10), mc(10);
  auto stats = [&](const IrtState& s, const pipecut::SelectState& sel,
                   const RollCallData& d) {
    double yea = 0.0;
    for (Eigen::Index i = 0; i < d.n(); ++i)
      for (Eigen::Index jj = 0; jj < d.j(); ++jj) yea += d.votes(i, jj);
    return std::vector<double>{static_cast<double>(sel.xi.sum()),
                               sel.eta0,
                               sel.eta[0],
                               s.zeta.cast<double>().sum(),
                               s.rho_mu,
                               std::log(s.sigma2_beta),
                               s.omega_alpha,
                               s.beta0.mean(),
                               s.mu.mean(),
                               yea / 12.0};
  };

  {
    Rng rng(201);
    for (int it = 0; it < m1; ++it) {
      pipecut::SelectState sel = pipecut::initial_select_state(3, 1);
      const double upsilon = rng.uniform();
      sel.xi[0] = rng.bernoulli(upsilon) ? 1 : 0;
      const double u = rng.uniform_pos();
      sel.eta0 = std::log(u / (1.0 - u));  // standard logistic draw
      sel.eta[0] = sel.xi[0] == 1 ? std::sqrt(slab_var) * rng.normal() : 0.0;
      Vector p_bridge(3);
      for (Eigen::Index i = 0; i < 3; ++i) {
        p_bridge[i] = pipecut::sigmoid(sel.eta0 + covs.x(i, 0) * sel.eta[0]);
      }
      IrtState s = forward_first_module(data, p_bridge, rng);
      sample_votes_in_place(data, s, rng);
      fwd.push(stats(s, sel, data));
    }
  }
  {
    Rng rng(202);
    pipecut::SelectState sel = pipecut::initial_select_state(3, 1);
    const double u = rng.uniform_pos();
    sel.eta0 = std::log(u / (1.0 - u));
    IrtState s = forward_first_module(data, Vector::Constant(3, 0.5), rng);
    sample_votes_in_place(data, s, rng);
    for (int it = 0; it < m2; ++it) {
      irt_sweep(s, data, ConditionalLogistic{sel.eta0, sel.eta, covs.x}, rng);
      mwg_sweep(sel, s.zeta, covs, rng);
      sample_votes_in_place(data, s, rng);
      mc.push(stats(s, sel, data));
    }
  }
  check_geweke(fwd, mc,
               {"sum_xi", "eta0", "eta_1", "sum_zeta", "rho_mu",
                "log_sigma2_beta", "omega_alpha", "mean_beta0", "mean_mu",
                "frac_yea"});
}
