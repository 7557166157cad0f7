#ifndef PIPECUT_COMMON_HPP
#define PIPECUT_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace pipecut {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::MatrixXi;
using IntVector = Eigen::VectorXi;

// Malformed user-supplied input: dimension mismatches, bad files, invalid
// configuration, non-positive-definite covariances handed in from outside.
// The CLI maps this to exit code 1.
class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical breakdown during an otherwise valid computation: non-finite
// sampler state, failed internal factorization, quadrature that does not
// converge.  The CLI maps this to exit code 2.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

// Numerically stable log(1 + exp(x)).
inline double log1p_exp(double x) {
  if (x > 33.0) return x;
  if (x < -33.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace pipecut

#endif  // PIPECUT_COMMON_HPP
