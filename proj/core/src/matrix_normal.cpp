#include "pipecut/matrix_normal.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace pipecut {

namespace {

constexpr double kSymmetryTol = 1e-10;

// Symmetrize by averaging, rejecting matrices whose asymmetry exceeds the
// tolerance relative to their magnitude.
Matrix symmetrized(const Matrix& a, const char* label) {
  if (a.rows() != a.cols()) {
    throw InvalidInput(std::string(label) + " covariance must be square");
  }
  const double dev = (a - a.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (dev > kSymmetryTol * scale) {
    throw InvalidInput(std::string(label) + " covariance is not symmetric");
  }
  return 0.5 * (a + a.transpose());
}

Eigen::LLT<Matrix> factorize(const Matrix& a, const char* label) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw InvalidInput(std::string(label) +
                       " covariance is not positive definite");
  }
  return llt;
}

double chol_log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

MatrixNormal::MatrixNormal(Matrix mean, Matrix row_cov, Matrix col_cov)
    : mean_(std::move(mean)),
      row_cov_(symmetrized(row_cov, "row")),
      col_cov_(symmetrized(col_cov, "column")),
      row_llt_(factorize(row_cov_, "row")),
      col_llt_(factorize(col_cov_, "column")) {
  if (row_cov_.rows() != mean_.rows() || col_cov_.rows() != mean_.cols()) {
    throw InvalidInput("mean dimensions are inconsistent with covariances");
  }
  row_log_det_ = chol_log_det(row_llt_);
  col_log_det_ = chol_log_det(col_llt_);
}

double MatrixNormal::log_density(const Matrix& x) const {
  if (x.rows() != rows() || x.cols() != cols()) {
    throw InvalidInput("log_density: matrix dimensions do not match");
  }
  const double n = static_cast<double>(rows());
  const double p = static_cast<double>(cols());
  // tr[V^-1 R^T U^-1 R] = || L_u^-1 R L_v^-T ||_F^2
  Matrix r = x - mean_;
  row_llt_.matrixL().solveInPlace(r);
  col_llt_.matrixU().solveInPlace<Eigen::OnTheRight>(r);
  const double quad = r.squaredNorm();
  return -0.5 * n * p * std::log(2.0 * std::numbers::pi) -
         0.5 * p * row_log_det_ - 0.5 * n * col_log_det_ - 0.5 * quad;
}

Matrix MatrixNormal::sample(Rng& rng) const {
  Matrix z(rows(), cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      z(i, j) = rng.normal();
    }
  }
  return mean_ + row_llt_.matrixL() * z * col_llt_.matrixU();
}

MatrixNormal transform(const Matrix& d, const MatrixNormal& dist,
                       const Matrix& c) {
  if (d.cols() != dist.rows() || c.rows() != dist.cols()) {
    throw InvalidInput("transform: dimension mismatch");
  }
  return MatrixNormal(d * dist.mean() * c, d * dist.row_cov() * d.transpose(),
                      c.transpose() * dist.col_cov() * c);
}

MatrixNormal convolve(const MatrixNormal& a, const MatrixNormal& b,
                      SharedAxis shared) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput("convolve: dimension mismatch");
  }
  const Matrix& sa = shared == SharedAxis::Column ? a.col_cov() : a.row_cov();
  const Matrix& sb = shared == SharedAxis::Column ? b.col_cov() : b.row_cov();
  const double dev = (sa - sb).cwiseAbs().maxCoeff();
  if (dev > 1e-10 * std::max(1.0, sa.cwiseAbs().maxCoeff())) {
    throw InvalidInput("convolve: shared covariance factors disagree");
  }
  if (shared == SharedAxis::Column) {
    return MatrixNormal(a.mean() + b.mean(), a.row_cov() + b.row_cov(), sa);
  }
  return MatrixNormal(a.mean() + b.mean(), sa, a.col_cov() + b.col_cov());
}

}  // namespace pipecut
