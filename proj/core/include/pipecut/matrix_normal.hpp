#ifndef PIPECUT_MATRIX_NORMAL_HPP
#define PIPECUT_MATRIX_NORMAL_HPP

#include <Eigen/Cholesky>

#include "pipecut/common.hpp"
#include "pipecut/rng.hpp"

namespace pipecut {

// Matrix-variate normal MVN(M, U, V): an n x p random matrix whose
// vectorization is N(vec(M), V kron U).  U is the n x n row covariance and
// V the p x p column covariance; both must be symmetric positive definite.
// All determinant, solve, and sampling work goes through the Cholesky
// factors computed once at construction.
class MatrixNormal {
 public:
  MatrixNormal(Matrix mean, Matrix row_cov, Matrix col_cov);

  Eigen::Index rows() const { return mean_.rows(); }
  Eigen::Index cols() const { return mean_.cols(); }

  const Matrix& mean() const { return mean_; }
  const Matrix& row_cov() const { return row_cov_; }
  const Matrix& col_cov() const { return col_cov_; }

  const Eigen::LLT<Matrix>& row_llt() const { return row_llt_; }
  const Eigen::LLT<Matrix>& col_llt() const { return col_llt_; }
  double row_log_det() const { return row_log_det_; }
  double col_log_det() const { return col_log_det_; }

  double log_density(const Matrix& x) const;

  // Exact draw M + L_u Z L_v^T with Z iid standard normal.
  Matrix sample(Rng& rng) const;

 private:
  Matrix mean_;
  Matrix row_cov_;
  Matrix col_cov_;
  Eigen::LLT<Matrix> row_llt_;
  Eigen::LLT<Matrix> col_llt_;
  double row_log_det_ = 0.0;
  double col_log_det_ = 0.0;
};

// D X C for X ~ MVN(M, U, V) is MVN(D M C, D U D^T, C^T V C).
MatrixNormal transform(const Matrix& d, const MatrixNormal& dist,
                       const Matrix& c);

enum class SharedAxis { Row, Column };

// Sum of independent matrix normals sharing one covariance factor.  With a
// shared column covariance the row covariances add, and vice versa.  The
// shared factor must agree within tolerance 1e-10.
MatrixNormal convolve(const MatrixNormal& a, const MatrixNormal& b,
                      SharedAxis shared);

}  // namespace pipecut

#endif  // PIPECUT_MATRIX_NORMAL_HPP
