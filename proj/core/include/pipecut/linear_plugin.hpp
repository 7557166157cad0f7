#ifndef PIPECUT_LINEAR_PLUGIN_HPP
#define PIPECUT_LINEAR_PLUGIN_HPP

#include <memory>

#include "pipecut/engine.hpp"
#include "pipecut/linear_pipeline.hpp"
#include "pipecut/matrix_normal.hpp"

namespace pipecut {

// Linear-Gaussian plug-in pair for the generic engine.  Every "sweep" is an
// exact conjugate draw, so engine output can be compared against the
// closed-form posteriors of the linear pipeline.
class LinearGaussianPipeline {
 public:
  using FirstState = Matrix;   // zeta, N x L
  using SecondState = Matrix;  // xi, K x L
  using Zeta = Matrix;

  LinearGaussianPipeline(const LinearPipelineConfig& cfg, Matrix y)
      : cfg_(cfg),
        y_(std::move(y)),
        working_(closed_form_posterior(y_, cfg_, PosteriorKind::WorkingFirstLevel)) {
    const Matrix xtx = cfg_.x().transpose() * cfg_.x();
    xtx_llt_.compute(xtx);
    xtx_inv_ = xtx_llt_.solve(Matrix::Identity(cfg_.k(), cfg_.k()));
    xtx_inv_chol_ = Eigen::LLT<Matrix>(xtx_inv_).matrixL();

    // Row-wise full conditional of zeta given (Y, xi) has the constant
    // precision W W^T / sigma2 + I_L / tau2.
    const Matrix prec = cfg_.w() * cfg_.w().transpose() / cfg_.sigma2() +
                        Matrix::Identity(cfg_.l(), cfg_.l()) / cfg_.tau2();
    Eigen::LLT<Matrix> prec_llt(prec);
    cond_cov_ = prec_llt.solve(Matrix::Identity(cfg_.l(), cfg_.l()));
    cond_cov_chol_ = Eigen::LLT<Matrix>(cond_cov_).matrixL();
  }

  const LinearPipelineConfig& config() const { return cfg_; }
  const Matrix& y() const { return y_; }

  FirstState init_first(Rng&) const { return working_.mean(); }
  SecondState init_second(Rng&) const { return Matrix::Zero(cfg_.k(), cfg_.l()); }

  void sweep_first_working(FirstState& zeta, Rng& rng) const {
    zeta = working_.sample(rng);  // exact iid draw
  }

  void sweep_first_conditional(FirstState& zeta, const SecondState& xi,
                               Rng& rng) const {
    const Matrix lin = y_ * cfg_.w().transpose() / cfg_.sigma2() +
                       cfg_.x() * xi / cfg_.tau2();
    const Matrix mean = lin * cond_cov_;
    Matrix z(cfg_.n(), cfg_.l());
    for (Eigen::Index i = 0; i < z.rows(); ++i)
      for (Eigen::Index c = 0; c < z.cols(); ++c) z(i, c) = rng.normal();
    zeta = mean + z * cond_cov_chol_.transpose();
  }

  void sweep_second(SecondState& xi, const Zeta& zeta, Rng& rng) const {
    const Matrix mean = xtx_llt_.solve(cfg_.x().transpose() * zeta);
    Matrix z(cfg_.k(), cfg_.l());
    for (Eigen::Index i = 0; i < z.rows(); ++i)
      for (Eigen::Index c = 0; c < z.cols(); ++c) z(i, c) = rng.normal();
    xi = mean + std::sqrt(cfg_.tau2()) * (xtx_inv_chol_ * z);
  }

  Zeta zeta_of(const FirstState& s) const { return s; }
  bool first_finite(const FirstState& s) const { return all_finite(s); }
  bool second_finite(const SecondState& s) const { return all_finite(s); }

 private:
  LinearPipelineConfig cfg_;
  Matrix y_;
  MatrixNormal working_;
  Eigen::LLT<Matrix> xtx_llt_;
  Matrix xtx_inv_;
  Matrix xtx_inv_chol_;
  Matrix cond_cov_;
  Matrix cond_cov_chol_;
};

}  // namespace pipecut

#endif  // PIPECUT_LINEAR_PLUGIN_HPP
