#include "pipecut/linear_pipeline.hpp"

#include <Eigen/QR>

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace pipecut {

namespace {

constexpr double kRankTol = 1e-10;

void require_full_rank(const Matrix& m, Eigen::Index expected,
                       const char* label) {
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  qr.setThreshold(kRankTol);
  if (qr.rank() != expected) {
    throw InvalidInput(std::string(label) + " is rank deficient");
  }
}

Eigen::LLT<Matrix> chol(const Matrix& a, const char* label) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalFailure(std::string(label) +
                           " factorization failed (not positive definite)");
  }
  return llt;
}

Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

}  // namespace

LinearPipelineConfig::LinearPipelineConfig(Matrix w, Matrix x, double sigma2,
                                           double tau2)
    : w_(std::move(w)), x_(std::move(x)), sigma2_(sigma2), tau2_(tau2) {
  if (w_.rows() > w_.cols()) {
    throw InvalidInput("W must have at most as many rows as columns (L <= J)");
  }
  if (x_.cols() > x_.rows()) {
    throw InvalidInput("X must have at most as many columns as rows (K <= N)");
  }
  if (!(sigma2_ > 0.0) || !(tau2_ > 0.0)) {
    throw InvalidInput("sigma2 and tau2 must be strictly positive");
  }
  require_full_rank(w_.transpose(), w_.rows(), "W");
  require_full_rank(x_, x_.cols(), "X");
}

Matrix omega(const LinearPipelineConfig& cfg) {
  return cfg.sigma2() * identity(cfg.j()) +
         cfg.tau2() * cfg.w().transpose() * cfg.w();
}

LinearSimulation simulate(const LinearPipelineConfig& cfg,
                          const Matrix& xi_true, const TrueVariances& truth,
                          Rng& rng) {
  if (xi_true.rows() != cfg.k() || xi_true.cols() != cfg.l()) {
    throw InvalidInput("simulate: xi_true must be K x L");
  }
  const double tau_star = std::sqrt(truth.tau2_star);
  const double sigma_star = std::sqrt(truth.sigma2_star);
  Matrix h(cfg.n(), cfg.l());
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index c = 0; c < h.cols(); ++c) h(i, c) = tau_star * rng.normal();
  }
  Matrix e(cfg.n(), cfg.j());
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    for (Eigen::Index c = 0; c < e.cols(); ++c) e(i, c) = sigma_star * rng.normal();
  }
  LinearSimulation sim;
  sim.zeta = cfg.x() * xi_true + h;
  sim.y = sim.zeta * cfg.w() + e;
  return sim;
}

MatrixNormal closed_form_posterior(const Matrix& y,
                                   const LinearPipelineConfig& cfg,
                                   PosteriorKind kind, const Matrix* zeta) {
  if ((kind == PosteriorKind::SecondConditional) != (zeta != nullptr)) {
    throw InvalidInput(
        "zeta must be supplied exactly when kind is SecondConditional");
  }
  if (kind != PosteriorKind::SecondConditional &&
      (y.rows() != cfg.n() || y.cols() != cfg.j())) {
    throw InvalidInput("closed_form_posterior: Y must be N x J");
  }

  const auto xtx_llt = chol(cfg.x().transpose() * cfg.x(), "X^T X");
  const Matrix xtx_inv = xtx_llt.solve(identity(cfg.k()));
  const auto wwt_llt = chol(cfg.w() * cfg.w().transpose(), "W W^T");
  const Matrix wwt_inv = wwt_llt.solve(identity(cfg.l()));

  switch (kind) {
    case PosteriorKind::Full: {
      // M_f = [X^T X]^-1 X^T Y Omega^-1 W^T [W Omega^-1 W^T]^-1.
      // Omega^-1 is applied through its Cholesky factor, never formed.
      const auto omega_llt = chol(omega(cfg), "Omega");
      const Matrix oi_wt = omega_llt.solve(cfg.w().transpose());  // J x L
      const auto gram_llt = chol(cfg.w() * oi_wt, "W Omega^-1 W^T");
      const Matrix a = xtx_llt.solve(cfg.x().transpose() * y);  // K x J
      const Matrix m = gram_llt.solve((a * oi_wt).transpose()).transpose();
      const Matrix v = cfg.sigma2() * wwt_inv + cfg.tau2() * identity(cfg.l());
      return MatrixNormal(m, xtx_inv, v);
    }
    case PosteriorKind::TwoStep:
    case PosteriorKind::Cut: {
      const Matrix a = xtx_llt.solve(cfg.x().transpose() * y);  // K x J
      const Matrix m = wwt_llt.solve((a * cfg.w().transpose()).transpose())
                           .transpose();
      if (kind == PosteriorKind::TwoStep) {
        return MatrixNormal(m, xtx_inv, cfg.tau2() * identity(cfg.l()));
      }
      const Matrix v = cfg.sigma2() * wwt_inv + cfg.tau2() * identity(cfg.l());
      return MatrixNormal(m, xtx_inv, v);
    }
    case PosteriorKind::WorkingFirstLevel: {
      const Matrix m =
          wwt_llt.solve((y * cfg.w().transpose()).transpose()).transpose();
      return MatrixNormal(m, identity(cfg.n()), cfg.sigma2() * wwt_inv);
    }
    case PosteriorKind::SecondConditional: {
      if (zeta->rows() != cfg.n() || zeta->cols() != cfg.l()) {
        throw InvalidInput("closed_form_posterior: zeta must be N x L");
      }
      const Matrix m = xtx_llt.solve(cfg.x().transpose() * (*zeta));
      return MatrixNormal(m, xtx_inv, cfg.tau2() * identity(cfg.l()));
    }
  }
  throw InvalidInput("unknown posterior kind");
}

SamplingCov estimator_sampling_cov(const LinearPipelineConfig& cfg,
                                   const TrueVariances& truth,
                                   PosteriorKind kind) {
  const auto xtx_llt = chol(cfg.x().transpose() * cfg.x(), "X^T X");
  SamplingCov out;
  out.row = xtx_llt.solve(identity(cfg.k()));
  const Matrix omega_star =
      truth.sigma2_star * identity(cfg.j()) +
      truth.tau2_star * cfg.w().transpose() * cfg.w();

  if (kind == PosteriorKind::Full) {
    const auto omega_llt = chol(omega(cfg), "Omega");
    const Matrix oi_wt = omega_llt.solve(cfg.w().transpose());  // J x L
    const auto gram_llt = chol(cfg.w() * oi_wt, "W Omega^-1 W^T");
    const Matrix core = oi_wt.transpose() * omega_star * oi_wt;  // L x L
    Matrix v = gram_llt.solve(gram_llt.solve(core).transpose());
    out.col = 0.5 * (v + v.transpose());
  } else if (kind == PosteriorKind::TwoStep) {
    const auto wwt_llt = chol(cfg.w() * cfg.w().transpose(), "W W^T");
    const Matrix core = cfg.w() * omega_star * cfg.w().transpose();
    Matrix v = wwt_llt.solve(wwt_llt.solve(core).transpose());
    out.col = 0.5 * (v + v.transpose());
  } else {
    throw InvalidInput(
        "estimator_sampling_cov: kind must be Full or TwoStep");
  }
  return out;
}

namespace {

// Unnormalized scalar log densities for the lemma check.  The grid code
// normalizes numerically, so only the data-dependent terms matter.
struct ScalarModel {
  double w, x, sigma2, tau2, y;

  double log_like(double zeta) const {  // log N(y; zeta w, sigma2)
    const double r = y - zeta * w;
    return -0.5 * r * r / sigma2;
  }
  double log_link(double zeta, double xi) const {  // log N(zeta; x xi, tau2)
    const double r = zeta - x * xi;
    return -0.5 * r * r / tau2;
  }
};

struct GridSpec {
  double zeta_lo, zeta_hi, xi_lo, xi_hi;
};

// One trapezoid pass at a fixed resolution; returns both KL estimates.
Lemma1Result kl_on_grid(const ScalarModel& m, const GridSpec& g, int n) {
  std::vector<double> zg(n), xg(n), wz(n), wx(n);
  const double dz = (g.zeta_hi - g.zeta_lo) / (n - 1);
  const double dx = (g.xi_hi - g.xi_lo) / (n - 1);
  for (int i = 0; i < n; ++i) {
    zg[i] = g.zeta_lo + dz * i;
    xg[i] = g.xi_lo + dx * i;
    wz[i] = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    wx[i] = (i == 0 || i == n - 1) ? 0.5 : 1.0;
  }

  // Full joint p_f(zeta, xi | y) on the grid, normalized numerically.
  Matrix full(n, n);
  double max_log = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double ll = m.log_like(zg[i]);
    for (int j = 0; j < n; ++j) {
      const double v = ll + m.log_link(zg[i], xg[j]);
      full(i, j) = v;
      max_log = std::max(max_log, v);
    }
  }
  double z_full = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      full(i, j) = std::exp(full(i, j) - max_log);
      z_full += wz[i] * wx[j] * full(i, j);
    }
  full /= z_full;

  // Working posterior over zeta and the conditional p(xi | zeta), each
  // normalized on the same grid.
  Vector working(n);
  double z_w = 0.0;
  for (int i = 0; i < n; ++i) {
    working[i] = std::exp(m.log_like(zg[i]));
    z_w += wz[i] * working[i];
  }
  working /= z_w;

  Matrix cut(n, n);
  for (int i = 0; i < n; ++i) {
    double z_cond = 0.0;
    for (int j = 0; j < n; ++j) {
      cut(i, j) = std::exp(m.log_link(zg[i], xg[j]));
      z_cond += wx[j] * cut(i, j);
    }
    for (int j = 0; j < n; ++j) cut(i, j) = working[i] * cut(i, j) / z_cond;
  }

  // Full zeta marginal by integrating the joint over xi.
  Vector full_marg(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += wx[j] * full(i, j);
    full_marg[i] = s;
  }

  // Grid values are cell masses (per trapezoid weight); the area factors
  // cancel between numerator and denominator inside the log.
  Lemma1Result r{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double c = cut(i, j);
      if (c > 0.0 && full(i, j) > 0.0) {
        r.kl_joint += wz[i] * wx[j] * c * std::log(c / full(i, j));
      }
    }
    if (working[i] > 0.0 && full_marg[i] > 0.0) {
      r.kl_marginal += wz[i] * working[i] * std::log(working[i] / full_marg[i]);
    }
  }
  return r;
}

}  // namespace

Lemma1Result lemma1_quantities(const LinearPipelineConfig& cfg, double y) {
  if (!cfg.scalar()) {
    throw InvalidInput("lemma1_quantities requires N = J = L = K = 1");
  }
  const ScalarModel m{cfg.w()(0, 0), cfg.x()(0, 0), cfg.sigma2(), cfg.tau2(),
                      y};

  // Grid centered on the posterior means, spanning >= 8 posterior sd.
  const double zeta_mean = m.y / m.w;
  const double zeta_sd = std::sqrt(m.sigma2 / (m.w * m.w));
  const double xi_mean = m.y / (m.x * m.w);
  const double xi_sd =
      std::sqrt((m.sigma2 / (m.w * m.w) + m.tau2) / (m.x * m.x));
  const double span = 10.0;
  const GridSpec g{zeta_mean - span * zeta_sd, zeta_mean + span * zeta_sd,
                   xi_mean - span * xi_sd, xi_mean + span * xi_sd};

  Lemma1Result prev = kl_on_grid(m, g, 65);
  for (int n = 129; n <= 4097; n = 2 * n - 1) {
    const Lemma1Result cur = kl_on_grid(m, g, n);
    if (std::abs(cur.kl_joint - prev.kl_joint) < 1e-8 &&
        std::abs(cur.kl_marginal - prev.kl_marginal) < 1e-8) {
      return {std::max(0.0, cur.kl_joint), std::max(0.0, cur.kl_marginal)};
    }
    prev = cur;
  }
  throw NumericalFailure("lemma1_quantities: grid refinement exceeded");
}

}  // namespace pipecut
