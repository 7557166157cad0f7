#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pipecut/diagnostics.hpp"
#include "pipecut/engine.hpp"
#include "pipecut/rng.hpp"
#include "testutil.hpp"

using pipecut::IntMatrix;
using pipecut::IntVector;
using pipecut::Matrix;
using pipecut::Rng;
using pipecut::Vector;

TEST_CASE("rhat") {
  SUBCASE("identical constant chains give exactly 1") {
    std::vector<Vector> chains(2, Vector::Constant(10, 3.0));
    CHECK(pipecut::rhat(chains) == 1.0);
  }
  SUBCASE("constant chains with different means give infinity") {
    std::vector<Vector> chains = {Vector::Constant(10, 1.0),
                                  Vector::Constant(10, 2.0)};
    CHECK(std::isinf(pipecut::rhat(chains)));
  }
  SUBCASE("hand-computed reference value") {
    Vector a(4), b(4);
    a << 1, 2, 3, 4;
    b << 2, 3, 4, 5;
    // n = 4, m = 2: W = 5/3, B = n var(means) = 2,
    // rhat = sqrt((n-1)/n + B/(n W)) = sqrt(3/4 + 2/(4*5/3)) = sqrt(1.05).
    CHECK(pipecut::rhat({a, b}) ==
          doctest::Approx(std::sqrt(1.05)).epsilon(1e-12));
  }
  SUBCASE("two long iid chains sit near 1") {
    Rng rng(5);
    Vector a(10000), b(10000);
    for (int i = 0; i < 10000; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
    }
    CHECK(pipecut::rhat({a, b}) == doctest::Approx(1.0).epsilon(0.01));
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(pipecut::rhat({Vector::Zero(10)}), pipecut::InvalidInput);
    CHECK_THROWS_AS(pipecut::rhat({Vector::Zero(2), Vector::Zero(2)}),
                    pipecut::InvalidInput);
    CHECK_THROWS_AS(pipecut::rhat({Vector::Zero(8), Vector::Zero(9)}),
                    pipecut::InvalidInput);
  }
}

TEST_CASE("pip and median model") {
  IntMatrix xi(4, 3);
  xi << 1, 1, 0,
        1, 0, 0,
        1, 1, 0,
        1, 0, 0;
  const Vector p = pipecut::pip({xi});
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.5);
  CHECK(p[2] == 0.0);
  const IntVector m = pipecut::median_model(p);
  CHECK(m[0] == 1);
  CHECK(m[1] == 1);  // inclusive boundary at exactly 0.5
  CHECK(m[2] == 0);

  SUBCASE("median model is invariant under trace permutation") {
    IntMatrix shuffled(4, 3);
    shuffled.row(0) = xi.row(2);
    shuffled.row(1) = xi.row(0);
    shuffled.row(2) = xi.row(3);
    shuffled.row(3) = xi.row(1);
    CHECK(pipecut::median_model(pipecut::pip({shuffled})) == m);
  }
}

TEST_CASE("bridging frequency") {
  SUBCASE("all-ones trace is constant 1") {
    IntMatrix z = IntMatrix::Ones(6, 4);
    const auto bf = pipecut::bridging_frequency({z});
    CHECK(bf.mean == 1.0);
    CHECK(bf.lo95 == 1.0);
    CHECK(bf.hi95 == 1.0);
  }
  SUBCASE("single draw (1,0,1,0) has frequency one half") {
    IntMatrix z(1, 4);
    z << 1, 0, 1, 0;
    const auto bf = pipecut::bridging_frequency({z});
    CHECK(bf.mean == 0.5);
  }
  SUBCASE("fixed trace matches a direct recount") {
    Rng rng(9);
    IntMatrix z(50, 8);
    for (Eigen::Index r = 0; r < 50; ++r)
      for (Eigen::Index c = 0; c < 8; ++c) z(r, c) = rng.bernoulli(0.3) ? 1 : 0;
    const auto bf = pipecut::bridging_frequency({z});
    std::vector<double> direct;
    for (Eigen::Index r = 0; r < 50; ++r) {
      direct.push_back(z.row(r).cast<double>().sum() / 8.0);
    }
    CHECK(bf.mean == doctest::Approx(testutil::mean_of(direct)).epsilon(1e-12));
    CHECK(bf.lo95 ==
          doctest::Approx(pipecut::empirical_quantile(direct, 0.025))
              .epsilon(1e-12));
  }
}

TEST_CASE("cumulative model probability") {
  SUBCASE("a single repeated model gives a flat curve at 1") {
    IntMatrix xi = IntMatrix::Zero(20, 3);
    const Vector curve = pipecut::cumulative_model_prob({xi}, 5);
    for (int r = 0; r < 5; ++r) CHECK(curve[r] == 1.0);
  }
  SUBCASE("curves are nondecreasing and bounded by 1") {
    Rng rng(11);
    IntMatrix xi(200, 4);
    for (Eigen::Index r = 0; r < 200; ++r)
      for (Eigen::Index c = 0; c < 4; ++c) xi(r, c) = rng.bernoulli(0.4) ? 1 : 0;
    const Vector curve = pipecut::cumulative_model_prob({xi}, 10);
    for (int r = 1; r < 10; ++r) {
      CHECK(curve[r] >= curve[r - 1]);
      CHECK(curve[r] <= 1.0 + 1e-12);
    }
  }
  SUBCASE("top 2^K covers everything observed") {
    Rng rng(13);
    IntMatrix xi(500, 3);
    for (Eigen::Index r = 0; r < 500; ++r)
      for (Eigen::Index c = 0; c < 3; ++c) xi(r, c) = rng.bernoulli(0.5) ? 1 : 0;
    const Vector curve = pipecut::cumulative_model_prob({xi}, 8);
    CHECK(curve[7] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("odds ratio summaries") {
  const std::vector<std::string> names = {"a", "b"};
  SUBCASE("constant traces give exact ratios") {
    Matrix eta(4, 2);
    eta.col(0).setZero();
    eta.col(1).setConstant(std::log(2.0));
    IntMatrix xi = IntMatrix::Ones(4, 2);
    const auto rows = pipecut::odds_ratio_summary({eta}, {xi}, names,
                                                  Vector::Ones(2));
    CHECK(rows[0].mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rows[1].mean == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rows[1].lo95 == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("a never-included covariate is flagged without a summary") {
    Matrix eta = Matrix::Zero(4, 2);
    IntMatrix xi = IntMatrix::Zero(4, 2);
    xi.col(0).setOnes();
    const auto rows = pipecut::odds_ratio_summary({eta}, {xi}, names,
                                                  Vector::Ones(2));
    CHECK(rows[0].ever_included);
    CHECK(!rows[1].ever_included);
    CHECK(rows[0].pip == 1.0);
    CHECK(rows[1].pip == 0.0);
  }
  SUBCASE("the scale multiplier applies inside the exponential") {
    Matrix eta(2, 1);
    eta << 0.4, 0.4;
    IntMatrix xi = IntMatrix::Ones(2, 1);
    Vector scale(1);
    scale << 5.0;
    const auto rows = pipecut::odds_ratio_summary({eta}, {xi}, {"x"}, scale);
    CHECK(rows[0].mean == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("empirical quantiles interpolate linearly") {
  std::vector<double> v = {1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(pipecut::empirical_quantile(v, 0.0) == 1.0);
  CHECK(pipecut::empirical_quantile(v, 1.0) == 5.0);
  CHECK(pipecut::empirical_quantile(v, 0.5) == 3.0);
  CHECK(pipecut::empirical_quantile(v, 0.25) == 2.0);
  CHECK(pipecut::empirical_quantile(v, 0.1) == doctest::Approx(1.4).epsilon(1e-12));
}

TEST_CASE("diagnose produces a fully populated report on a real run") {
  pipecut::RollCallSimSettings st;
  st.n_legislators = 10;
  st.n_votes = 12;
  Rng gen(21);
  const auto sim = simulate_rollcall(st, gen);
  Rng crng(22);
  Matrix x(10, 2);
  for (Eigen::Index i = 0; i < 10; ++i)
    for (Eigen::Index c = 0; c < 2; ++c) x(i, c) = crng.normal();
  const auto covs = pipecut::CovariateMatrix::validated(x, {"one", "two"}, true);

  pipecut::ChainConfig cfg;
  cfg.chains = 2;
  cfg.burn_in = 100;
  cfg.samples = 300;
  cfg.seed = 23;
  const auto samples = run_full(sim.data, covs, cfg);
  const auto rep = pipecut::diagnose(samples, 10);

  CHECK(rep.pips.size() == 2);
  for (Eigen::Index k = 0; k < 2; ++k) {
    CHECK(rep.pips[k] >= 0.0);
    CHECK(rep.pips[k] <= 1.0);
  }
  CHECK(rep.median.size() == 2);
  CHECK(rep.cumulative_prob.size() == 10);
  CHECK(rep.cumulative_prob[9] <= 1.0 + 1e-12);
  CHECK(rep.bf.mean >= 0.0);
  CHECK(rep.bf.mean <= 1.0);
  CHECK(rep.bf.lo95 <= rep.bf.hi95);
  CHECK(rep.has_kl_bound);
  CHECK(rep.odds_ratios.size() == 2);
  REQUIRE(!rep.rhat_names.empty());
  for (Eigen::Index i = 0; i < rep.rhat_values.size(); ++i) {
    CHECK(rep.rhat_values[i] >= 1.0 - 0.25);  // 1 - eps numerically
  }
}
