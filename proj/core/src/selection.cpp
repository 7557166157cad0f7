#include "pipecut/selection.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "pipecut/polya_gamma.hpp"

namespace pipecut {

double bridge_prob(double eta0, const Vector& eta, const Vector& x) {
  if (eta.size() != x.size()) {
    throw InvalidInput("bridge_prob: covariate dimension mismatch");
  }
  return sigmoid(eta0 + x.dot(eta));
}

double log_prior_xi(const IntVector& xi) {
  if (xi.size() < 1) throw InvalidInput("log_prior_xi: K must be >= 1");
  const double k = static_cast<double>(xi.size());
  const double s = xi.cast<double>().sum();
  return std::lgamma(s + 1.0) + std::lgamma(k - s + 1.0) - std::lgamma(k + 2.0);
}

double working_prior_logprob(const IntVector& zeta) {
  if (zeta.size() < 1) throw InvalidInput("working_prior_logprob: N must be >= 1");
  const double n = static_cast<double>(zeta.size());
  const double s = zeta.cast<double>().sum();
  return std::lgamma(s + 1.0) + std::lgamma(n - s + 1.0) - std::lgamma(n + 2.0);
}

double log_prior_eta_given_xi(const Vector& eta, const IntVector& xi,
                              const CovariateMatrix& covs) {
  if (eta.size() != xi.size() || xi.size() != covs.k()) {
    throw InvalidInput("log_prior_eta_given_xi: dimension mismatch");
  }
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < xi.size(); ++k) {
    if (xi[k] == 1) {
      idx.push_back(k);
    } else if (eta[k] != 0.0) {
      throw InvalidInput("eta must be exactly 0 where xi is 0");
    }
  }
  const Eigen::Index s = static_cast<Eigen::Index>(idx.size());
  if (s == 0) return 0.0;

  Matrix gram(s, s);
  Vector sub(s);
  for (Eigen::Index a = 0; a < s; ++a) {
    sub[a] = eta[idx[a]];
    for (Eigen::Index b = 0; b < s; ++b) {
      gram(a, b) = covs.x.col(idx[a]).dot(covs.x.col(idx[b]));
    }
  }
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalFailure("log_prior_eta_given_xi: X_xi^T X_xi is singular");
  }
  const double scale = 4.0 * static_cast<double>(covs.n());
  const double log_det_gram =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  // Covariance scale N(0, scale * gram^-1): logdet = s log(scale) - logdet(gram).
  const double log_det_cov = s * std::log(scale) - log_det_gram;
  const double quad = sub.dot(gram * sub) / scale;
  return -0.5 * s * std::log(2.0 * std::numbers::pi) - 0.5 * log_det_cov -
         0.5 * quad;
}

namespace {

// Sufficient statistics for one sweep's Gaussian work, computed once after
// the auxiliaries are refreshed.
struct SweepStats {
  double w00;    // total intercept weight, data plus pseudo rows
  double h0;     // intercept linear term (pseudo rows cancel)
  Vector wx;     // sum_i omega_i x_i
  Matrix wxx;    // sum_i omega_i x_i x_i^T
  Vector hx;     // X^T kappa
  Matrix gram;   // X^T X for the slab precision
  double slab_scale;  // 4N
};

// Log marginal score of model xi with (eta0, eta_xi) integrated out under
// the PG-Gaussian likelihood, up to a constant shared by all models.
// Returns nullopt when X_xi^T X_xi is numerically singular.
std::optional<double> model_score(const IntVector& xi, const SweepStats& st,
                                  Eigen::LLT<Matrix>* out_llt = nullptr,
                                  Vector* out_h = nullptr,
                                  std::vector<Eigen::Index>* out_idx = nullptr) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < xi.size(); ++k) {
    if (xi[k] == 1) idx.push_back(k);
  }
  const Eigen::Index s = static_cast<Eigen::Index>(idx.size());

  Matrix sub_gram(s, s);
  for (Eigen::Index a = 0; a < s; ++a) {
    for (Eigen::Index b = 0; b < s; ++b) {
      sub_gram(a, b) = st.gram(idx[a], idx[b]);
    }
  }
  double log_det_prior_prec = 0.0;  // log |X_xi^T X_xi / 4N|
  if (s > 0) {
    Eigen::LLT<Matrix> gram_llt(sub_gram);
    if (gram_llt.info() != Eigen::Success) return std::nullopt;
    log_det_prior_prec =
        2.0 * gram_llt.matrixL().toDenseMatrix().diagonal().array().log().sum() -
        s * std::log(st.slab_scale);
  }

  Matrix p(1 + s, 1 + s);
  Vector h(1 + s);
  p(0, 0) = st.w00;
  h[0] = st.h0;
  for (Eigen::Index a = 0; a < s; ++a) {
    p(0, 1 + a) = st.wx[idx[a]];
    p(1 + a, 0) = st.wx[idx[a]];
    h[1 + a] = st.hx[idx[a]];
    for (Eigen::Index b = 0; b < s; ++b) {
      p(1 + a, 1 + b) =
          st.wxx(idx[a], idx[b]) + sub_gram(a, b) / st.slab_scale;
    }
  }
  Eigen::LLT<Matrix> llt(p);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const double log_det_p =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double quad = h.dot(llt.solve(h));

  const double log_model_prior = xi.size() > 0 ? log_prior_xi(xi) : 0.0;
  const double score =
      log_model_prior + 0.5 * log_det_prior_prec - 0.5 * log_det_p + 0.5 * quad;
  if (out_llt) *out_llt = llt;
  if (out_h) *out_h = h;
  if (out_idx) *out_idx = idx;
  return score;
}

}  // namespace

void mwg_sweep(SelectState& state, const IntVector& zeta,
               const CovariateMatrix& covs, Rng& rng) {
  const Eigen::Index n = covs.n();
  const Eigen::Index k = covs.k();
  if (zeta.size() != n || state.xi.size() != k || state.eta.size() != k ||
      state.pg_aux.size() != n) {
    throw InvalidInput("mwg_sweep: dimension mismatch");
  }

  // (1) Refresh the PG auxiliaries given the current coefficients.
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lin = state.eta0 + covs.x.row(i).dot(state.eta);
    state.pg_aux[i] = sample_pg1(lin, rng);
  }
  state.pg_aux0[0] = sample_pg1(state.eta0, rng);
  state.pg_aux0[1] = sample_pg1(state.eta0, rng);

  SweepStats st;
  st.w00 = state.pg_aux.sum() + state.pg_aux0.sum();
  st.h0 = zeta.cast<double>().sum() - 0.5 * n;  // pseudo rows contribute 0
  st.wx = covs.x.transpose() * state.pg_aux;
  st.wxx = covs.x.transpose() * state.pg_aux.asDiagonal() * covs.x;
  st.hx = covs.x.transpose() * (zeta.cast<double>().array() - 0.5).matrix();
  st.gram = covs.x.transpose() * covs.x;
  st.slab_scale = 4.0 * static_cast<double>(n);

  // (2) Metropolized single flips of xi in random scan order.
  std::optional<double> current = model_score(state.xi, st);
  if (!current) {
    throw NumericalFailure("mwg_sweep: current model is numerically singular");
  }
  if (k > 0) {
    std::vector<Eigen::Index> order(k);
    for (Eigen::Index i = 0; i < k; ++i) order[i] = i;
    for (Eigen::Index i = k - 1; i > 0; --i) {
      const Eigen::Index jj =
          static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[i], order[jj]);
    }
    for (const Eigen::Index kk : order) {
      state.xi[kk] = 1 - state.xi[kk];
      const std::optional<double> proposed = model_score(state.xi, st);
      bool accept = false;
      if (proposed) {
        accept = std::log(rng.uniform_pos()) < *proposed - *current;
      } else {
        ++state.rank_rejections;
      }
      if (accept) {
        current = proposed;
      } else {
        state.xi[kk] = 1 - state.xi[kk];  // undo
      }
    }
  }

  // (3) Exact joint Gaussian draw of (eta0, eta_xi); excluded coefficients
  // stay exactly 0.
  Eigen::LLT<Matrix> llt;
  Vector h;
  std::vector<Eigen::Index> idx;
  if (!model_score(state.xi, st, &llt, &h, &idx)) {
    throw NumericalFailure("mwg_sweep: accepted model became singular");
  }
  Vector z(1 + static_cast<Eigen::Index>(idx.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  Vector u = llt.solve(h);
  llt.matrixU().solveInPlace(z);
  u += z;
  state.eta0 = u[0];
  state.eta.setZero();
  for (std::size_t a = 0; a < idx.size(); ++a) state.eta[idx[a]] = u[1 + a];
}

SelectState initial_select_state(Eigen::Index n, Eigen::Index k) {
  SelectState s;
  s.xi = IntVector::Zero(k);
  s.eta0 = 0.0;
  s.eta = Vector::Zero(k);
  s.pg_aux = Vector::Constant(n, 0.25);
  s.pg_aux0 = Eigen::Vector2d(0.25, 0.25);
  return s;
}

}  // namespace pipecut
