#ifndef PIPECUT_LINEAR_PIPELINE_HPP
#define PIPECUT_LINEAR_PIPELINE_HPP

#include "pipecut/common.hpp"
#include "pipecut/matrix_normal.hpp"
#include "pipecut/rng.hpp"

namespace pipecut {

// Two-module matrix-variate linear pipeline with known variances:
//   Y = zeta W + E,     E ~ MVN(0, I_N, sigma2 I_J)
//   zeta = X xi + H,    H ~ MVN(0, tau2 I_N, I_L)
// under flat reference priors on xi and (for the working posterior) zeta.
// The full, two-step, and cut posteriors over xi are available in closed
// form; see closed_form_posterior.
class LinearPipelineConfig {
 public:
  // W is L x J with full row rank, X is N x K with full column rank,
  // both checked by rank-revealing pivoted QR.
  LinearPipelineConfig(Matrix w, Matrix x, double sigma2, double tau2);

  Eigen::Index n() const { return x_.rows(); }
  Eigen::Index j() const { return w_.cols(); }
  Eigen::Index l() const { return w_.rows(); }
  Eigen::Index k() const { return x_.cols(); }

  const Matrix& w() const { return w_; }
  const Matrix& x() const { return x_; }
  double sigma2() const { return sigma2_; }
  double tau2() const { return tau2_; }

  bool scalar() const { return n() == 1 && j() == 1 && l() == 1 && k() == 1; }

 private:
  Matrix w_;
  Matrix x_;
  double sigma2_;
  double tau2_;
};

struct TrueVariances {
  double sigma2_star;
  double tau2_star;

  TrueVariances(double s2, double t2) : sigma2_star(s2), tau2_star(t2) {
    if (!(s2 > 0.0) || !(t2 > 0.0)) {
      throw InvalidInput("true variances must be strictly positive");
    }
  }
};

enum class PosteriorKind { Full, TwoStep, Cut, WorkingFirstLevel, SecondConditional };

// Marginal column covariance sigma2 I_J + tau2 W^T W of Y given xi.
Matrix omega(const LinearPipelineConfig& cfg);

struct LinearSimulation {
  Matrix y;     // N x J
  Matrix zeta;  // N x L
};

LinearSimulation simulate(const LinearPipelineConfig& cfg,
                          const Matrix& xi_true, const TrueVariances& truth,
                          Rng& rng);

// Closed-form posterior for the requested kind.  Full/TwoStep/Cut return the
// K x L posterior over xi; WorkingFirstLevel the N x L posterior over zeta;
// SecondConditional the posterior over xi given the supplied zeta (required
// for that kind only).
MatrixNormal closed_form_posterior(const Matrix& y,
                                   const LinearPipelineConfig& cfg,
                                   PosteriorKind kind,
                                   const Matrix* zeta = nullptr);

// Kronecker factors of the frequentist sampling covariance of the point
// estimators under a possibly different true data-generating variance pair:
// Cov(vec(estimator)) = col kron row.  kind must be Full (xi hat) or
// TwoStep (xi tilde).
struct SamplingCov {
  Matrix row;  // K x K
  Matrix col;  // L x L
};

SamplingCov estimator_sampling_cov(const LinearPipelineConfig& cfg,
                                   const TrueVariances& truth,
                                   PosteriorKind kind);

// Numerical check of the KL identity between cut and full posteriors on the
// all-scalar pipeline (N = J = L = K = 1).  kl_joint integrates the joint
// (zeta, xi) densities on a 2-D grid; kl_marginal integrates the zeta
// marginals on a 1-D grid.  Adaptive trapezoid quadrature with doubling
// grids until successive estimates differ by < 1e-8.
struct Lemma1Result {
  double kl_joint;
  double kl_marginal;
};

Lemma1Result lemma1_quantities(const LinearPipelineConfig& cfg, double y);

}  // namespace pipecut

#endif  // PIPECUT_LINEAR_PIPELINE_HPP
