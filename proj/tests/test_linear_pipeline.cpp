#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pipecut/linear_pipeline.hpp"
#include "pipecut/rng.hpp"
#include "testutil.hpp"

using pipecut::InvalidInput;
using pipecut::LinearPipelineConfig;
using pipecut::Matrix;
using pipecut::PosteriorKind;
using pipecut::Rng;
using pipecut::TrueVariances;
using pipecut::Vector;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

LinearPipelineConfig random_config(Eigen::Index n, Eigen::Index j,
                                   Eigen::Index l, Eigen::Index k, Rng& rng,
                                   double sigma2 = 1.0, double tau2 = 1.0) {
  return LinearPipelineConfig(random_matrix(l, j, rng), random_matrix(n, k, rng),
                              sigma2, tau2);
}

}  // namespace

TEST_CASE("omega basics") {
  SUBCASE("identity design, unit variances") {
    LinearPipelineConfig cfg(Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                             1.0, 1.0);
    CHECK((omega(cfg) - 2.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <
          1e-14);
  }
  SUBCASE("tiny tau2 gives nearly sigma2 I") {
    Rng rng(3);
    LinearPipelineConfig cfg(random_matrix(2, 4, rng), Matrix::Identity(3, 2),
                             2.0, 1e-12);
    CHECK((omega(cfg) - 2.0 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <
          1e-10);
  }
  SUBCASE("random case matches the direct product") {
    Rng rng(4);
    const Matrix w = random_matrix(2, 4, rng);
    LinearPipelineConfig cfg(w, Matrix::Identity(5, 2), 1.7, 0.3);
    const Matrix direct =
        1.7 * Matrix::Identity(4, 4) + 0.3 * w.transpose() * w;
    CHECK((omega(cfg) - direct).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("config validation") {
  Rng rng(5);
  SUBCASE("rank-deficient W is rejected") {
    Matrix w(2, 4);
    w.row(0) = random_matrix(1, 4, rng);
    w.row(1) = 2.0 * w.row(0);
    CHECK_THROWS_AS(
        LinearPipelineConfig(w, Matrix::Identity(3, 2), 1.0, 1.0), InvalidInput);
  }
  SUBCASE("rank-deficient X is rejected") {
    Matrix x(4, 2);
    x.col(0) = random_matrix(4, 1, rng);
    x.col(1) = -3.0 * x.col(0);
    CHECK_THROWS_AS(
        LinearPipelineConfig(Matrix::Identity(2, 2), x, 1.0, 1.0), InvalidInput);
  }
  SUBCASE("nonpositive variances are rejected") {
    CHECK_THROWS_AS(LinearPipelineConfig(Matrix::Identity(2, 2),
                                         Matrix::Identity(2, 2), 0.0, 1.0),
                    InvalidInput);
    CHECK_THROWS_AS(TrueVariances(1.0, -1.0), InvalidInput);
  }
}

TEST_CASE("simulate: determinism and the noiseless limit") {
  Rng rng(6);
  auto cfg = random_config(4, 5, 2, 2, rng);
  const Matrix xi = random_matrix(2, 2, rng);
  SUBCASE("same seed, same data") {
    Rng r1(42), r2(42);
    const auto s1 = simulate(cfg, xi, TrueVariances(0.5, 0.5), r1);
    const auto s2 = simulate(cfg, xi, TrueVariances(0.5, 0.5), r2);
    CHECK(s1.y == s2.y);
    CHECK(s1.zeta == s2.zeta);
  }
  SUBCASE("noise-free limit recovers X xi W") {
    Rng r(43);
    const auto s = simulate(cfg, xi, TrueVariances(1e-12, 1e-12), r);
    CHECK((s.y - cfg.x() * xi * cfg.w()).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("simulate: Monte Carlo covariance of vec(Y - X xi W) is Omega* kron I") {
  Rng rng(7);
  const Eigen::Index n = 3, j = 4;
  auto cfg = random_config(n, j, 2, 2, rng);
  const Matrix xi = random_matrix(2, 2, rng);
  const TrueVariances truth(0.8, 1.4);
  const Matrix omega_star = 0.8 * Matrix::Identity(j, j) +
                            1.4 * cfg.w().transpose() * cfg.w();

  Rng sim_rng(8);
  const int reps = 10000;
  const Eigen::Index d = n * j;
  Matrix sum = Matrix::Zero(d, 1);
  Matrix outer = Matrix::Zero(d, d);
  for (int r = 0; r < reps; ++r) {
    const auto s = simulate(cfg, xi, truth, sim_rng);
    const Vector v = testutil::vec(s.y - cfg.x() * xi * cfg.w());
    sum += v;
    outer += v * v.transpose();
  }
  const Matrix mean = sum / reps;
  const Matrix emp = outer / reps - mean * mean.transpose();
  const Matrix analytic = testutil::kron(omega_star, Matrix::Identity(n, n));
  CHECK((emp - analytic).norm() / analytic.norm() < 0.05);
}

TEST_CASE("identity designs make all three posteriors explicit") {
  Rng rng(9);
  LinearPipelineConfig cfg(Matrix::Identity(2, 2), Matrix::Identity(2, 2), 1.0,
                           1.0);
  const Matrix y = random_matrix(2, 2, rng);
  const auto full = closed_form_posterior(y, cfg, PosteriorKind::Full);
  const auto two = closed_form_posterior(y, cfg, PosteriorKind::TwoStep);
  const auto cut = closed_form_posterior(y, cfg, PosteriorKind::Cut);
  const Matrix i2 = Matrix::Identity(2, 2);

  CHECK((full.mean() - y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((two.mean() - y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((cut.mean() - y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((full.row_cov() - i2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((full.col_cov() - 2.0 * i2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((two.col_cov() - i2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((cut.col_cov() - 2.0 * i2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sigma2 -> 0 collapses the cut variance onto the two-step variance") {
  Rng rng(10);
  // W with orthonormal rows so W W^T = I.
  LinearPipelineConfig cfg(Matrix::Identity(2, 3), random_matrix(4, 2, rng),
                           1e-8, 0.9);
  const Matrix y = random_matrix(4, 3, rng);
  const auto cut = closed_form_posterior(y, cfg, PosteriorKind::Cut);
  const auto two = closed_form_posterior(y, cfg, PosteriorKind::TwoStep);
  // The gap is sigma2 * (W W^T)^-1 = 1e-8 I up to the rounding of
  // (tau2 + 1e-8) - tau2.
  CHECK((cut.col_cov() - two.col_cov()).cwiseAbs().maxCoeff() <= 1.01e-8);
}

TEST_CASE("full posterior mean equals the dense vectorized GLS estimate") {
  Rng rng(12);
  for (int rep = 0; rep < 5; ++rep) {
    auto cfg = random_config(6, 8, 2, 2, rng, 1.3, 0.6);
    const Matrix xi = random_matrix(2, 2, rng);
    Rng sim_rng(100 + rep);
    const auto sim = simulate(cfg, xi, TrueVariances(1.3, 0.6), sim_rng);

    const auto full = closed_form_posterior(sim.y, cfg, PosteriorKind::Full);

    // Dense oracle: vec(Y) = (W^T kron X) vec(xi) + noise, Cov = Omega kron I.
    const Matrix a = testutil::kron(cfg.w().transpose(), cfg.x());
    const Matrix sigma =
        testutil::kron(omega(cfg), Matrix::Identity(cfg.n(), cfg.n()));
    const Matrix sigma_inv = sigma.inverse();
    const Vector gls = (a.transpose() * sigma_inv * a)
                           .inverse() *
                       (a.transpose() * sigma_inv * testutil::vec(sim.y));
    CHECK((testutil::vec(full.mean()) - gls).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("posterior identities across random configurations") {
  Rng rng(13);
  for (int rep = 0; rep < 25; ++rep) {
    auto cfg = random_config(5, 7, 2, 3, rng, 0.5 + rng.uniform(),
                             0.5 + rng.uniform());
    Rng sim_rng(200 + rep);
    const auto sim =
        simulate(cfg, random_matrix(3, 2, sim_rng), TrueVariances(1.0, 1.0),
                 sim_rng);
    const auto full = closed_form_posterior(sim.y, cfg, PosteriorKind::Full);
    const auto two = closed_form_posterior(sim.y, cfg, PosteriorKind::TwoStep);
    const auto cut = closed_form_posterior(sim.y, cfg, PosteriorKind::Cut);

    // Mean identity: M_t == M_c (same code path).
    CHECK((two.mean() - cut.mean()).cwiseAbs().maxCoeff() == 0.0);
    // Variance identity: V_f == V_c.
    CHECK((full.col_cov() - cut.col_cov()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((full.row_cov() - cut.row_cov()).cwiseAbs().maxCoeff() < 1e-10);
    // Strict trace ordering of the Kronecker covariances.
    const double tr_cut = cut.col_cov().trace() * cut.row_cov().trace();
    const double tr_two = two.col_cov().trace() * two.row_cov().trace();
    CHECK(tr_cut > tr_two);
    // Woodbury identity: [W Omega^-1 W^T]^-1 == sigma2 [W W^T]^-1 + tau2 I.
    const Matrix gram =
        cfg.w() * omega(cfg).inverse() * cfg.w().transpose();
    const Matrix lhs = gram.inverse();
    const Matrix rhs =
        cfg.sigma2() * (cfg.w() * cfg.w().transpose()).inverse() +
        cfg.tau2() * Matrix::Identity(cfg.l(), cfg.l());
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("working first level and second conditional posteriors") {
  Rng rng(14);
  auto cfg = random_config(5, 6, 2, 2, rng);
  Rng sim_rng(300);
  const auto sim =
      simulate(cfg, random_matrix(2, 2, sim_rng), TrueVariances(1.0, 1.0),
               sim_rng);
  const auto wk =
      closed_form_posterior(sim.y, cfg, PosteriorKind::WorkingFirstLevel);
  CHECK(wk.rows() == 5);
  CHECK(wk.cols() == 2);
  const Matrix wwt_inv = (cfg.w() * cfg.w().transpose()).inverse();
  CHECK((wk.mean() - sim.y * cfg.w().transpose() * wwt_inv).cwiseAbs().maxCoeff() <
        1e-10);
  CHECK((wk.col_cov() - cfg.sigma2() * wwt_inv).cwiseAbs().maxCoeff() < 1e-10);

  const Matrix zeta = wk.mean();
  const auto cond = closed_form_posterior(sim.y, cfg,
                                          PosteriorKind::SecondConditional,
                                          &zeta);
  const Matrix xtx_inv = (cfg.x().transpose() * cfg.x()).inverse();
  CHECK((cond.mean() - xtx_inv * cfg.x().transpose() * zeta).cwiseAbs().maxCoeff() <
        1e-10);

  SUBCASE("zeta must be supplied exactly for SecondConditional") {
    CHECK_THROWS_AS(closed_form_posterior(sim.y, cfg, PosteriorKind::Full, &zeta),
                    InvalidInput);
    CHECK_THROWS_AS(
        closed_form_posterior(sim.y, cfg, PosteriorKind::SecondConditional),
        InvalidInput);
  }
}

TEST_CASE("sampling covariance formulas") {
  Rng rng(15);
  SUBCASE("correctly specified full collapses to the Woodbury form") {
    auto cfg = random_config(5, 7, 2, 2, rng, 1.2, 0.7);
    const auto sc = estimator_sampling_cov(cfg, TrueVariances(1.2, 0.7),
                                           PosteriorKind::Full);
    const Matrix rhs =
        1.2 * (cfg.w() * cfg.w().transpose()).inverse() +
        0.7 * Matrix::Identity(2, 2);
    CHECK((sc.col - rhs).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("orthonormal W rows give (sigma2* + tau2*) I for two-step") {
    LinearPipelineConfig cfg(Matrix::Identity(2, 4), random_matrix(5, 2, rng),
                             1.0, 1.0);
    const auto sc = estimator_sampling_cov(cfg, TrueVariances(0.3, 0.9),
                                           PosteriorKind::TwoStep);
    CHECK((sc.col - 1.2 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("two-step covariance ignores the fitted variances entirely") {
    Rng wrng(16);
    const Matrix w = random_matrix(2, 6, wrng);
    const Matrix x = random_matrix(5, 2, wrng);
    const TrueVariances truth(0.4, 1.1);
    const auto a = estimator_sampling_cov(LinearPipelineConfig(w, x, 1.0, 1.0),
                                          truth, PosteriorKind::TwoStep);
    const auto b = estimator_sampling_cov(
        LinearPipelineConfig(w, x, 123.0, 0.007), truth, PosteriorKind::TwoStep);
    CHECK((a.col - b.col).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((a.row - b.row).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("kind must be a point-estimator posterior") {
    auto cfg = random_config(4, 5, 2, 2, rng);
    CHECK_THROWS_AS(estimator_sampling_cov(cfg, TrueVariances(1.0, 1.0),
                                           PosteriorKind::Cut),
                    InvalidInput);
  }
}

TEST_CASE("unbiasedness of both point estimators (small Monte Carlo)") {
  Rng rng(18);
  auto cfg = random_config(6, 8, 2, 2, rng, 1.0, 1.0);
  const Matrix xi = random_matrix(2, 2, rng);
  const TrueVariances truth(1.0, 1.0);
  Rng sim_rng(19);
  const int reps = 4000;
  Matrix sum_full = Matrix::Zero(2, 2);
  Matrix sum_two = Matrix::Zero(2, 2);
  Matrix sumsq_full = Matrix::Zero(2, 2);
  Matrix sumsq_two = Matrix::Zero(2, 2);
  for (int r = 0; r < reps; ++r) {
    const auto sim = simulate(cfg, xi, truth, sim_rng);
    const Matrix mf =
        closed_form_posterior(sim.y, cfg, PosteriorKind::Full).mean();
    const Matrix mt =
        closed_form_posterior(sim.y, cfg, PosteriorKind::TwoStep).mean();
    sum_full += mf;
    sum_two += mt;
    sumsq_full += mf.cwiseProduct(mf);
    sumsq_two += mt.cwiseProduct(mt);
  }
  const auto check_unbiased = [&](const Matrix& sum, const Matrix& sumsq) {
    const Matrix mean = sum / reps;
    const Matrix var = sumsq / reps - mean.cwiseProduct(mean);
    for (Eigen::Index i = 0; i < 2; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) {
        const double se = std::sqrt(var(i, j) / reps);
        CHECK(std::abs(mean(i, j) - xi(i, j)) < 3.0 * se);
      }
    }
  };
  check_unbiased(sum_full, sumsq_full);
  check_unbiased(sum_two, sumsq_two);
}

TEST_CASE("lemma 1 quadrature on the scalar pipeline") {
  SUBCASE("reference case w = x = 1, sigma2 = tau2 = 1, y = 1") {
    LinearPipelineConfig cfg(Matrix::Ones(1, 1), Matrix::Ones(1, 1), 1.0, 1.0);
    const auto r = lemma1_quantities(cfg, 1.0);
    CHECK(r.kl_joint >= 0.0);
    CHECK(r.kl_marginal >= 0.0);
    // With flat priors the scalar full model collapses onto the working
    // posterior, so both divergences are analytically zero.
    CHECK(r.kl_joint < 1e-6);
    CHECK(r.kl_marginal < 1e-6);
    CHECK(std::abs(r.kl_joint - r.kl_marginal) < 1e-6);
  }
  SUBCASE("tiny sigma2 limit") {
    LinearPipelineConfig cfg(Matrix::Ones(1, 1), Matrix::Ones(1, 1), 1e-8, 1.0);
    const auto r = lemma1_quantities(cfg, 0.3);
    CHECK(r.kl_joint < 1e-6);
    CHECK(r.kl_marginal < 1e-6);
  }
  SUBCASE("equality holds across random scalar configurations") {
    Rng rng(20);
    for (int rep = 0; rep < 10; ++rep) {
      Matrix w(1, 1), x(1, 1);
      w(0, 0) = 0.5 + rng.uniform();
      x(0, 0) = 0.5 + rng.uniform();
      LinearPipelineConfig cfg(w, x, 0.3 + rng.uniform(), 0.3 + rng.uniform());
      const auto r = lemma1_quantities(cfg, rng.normal());
      CHECK(std::abs(r.kl_joint - r.kl_marginal) < 1e-6);
    }
  }
  SUBCASE("non-scalar configs are rejected") {
    LinearPipelineConfig cfg(Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                             1.0, 1.0);
    CHECK_THROWS_AS(lemma1_quantities(cfg, 1.0), InvalidInput);
  }
}
