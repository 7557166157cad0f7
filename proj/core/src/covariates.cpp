#include "pipecut/covariates.hpp"

#include <Eigen/QR>

#include <cmath>
#include <utility>

namespace pipecut {

CovariateMatrix CovariateMatrix::validated(Matrix x,
                                           std::vector<std::string> names,
                                           bool standardize) {
  if (names.empty() && x.cols() > 0) {
    names.resize(x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      names[k] = "x" + std::to_string(k + 1);
    }
  }
  if (static_cast<Eigen::Index>(names.size()) != x.cols()) {
    throw InvalidInput("covariate names do not match the number of columns");
  }
  if (!all_finite(x)) throw InvalidInput("covariates contain non-finite values");

  if (standardize && x.cols() > 0) {
    const Eigen::Index n = x.rows();
    if (n < 2) throw InvalidInput("standardization needs at least 2 rows");
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      const double mean = x.col(k).mean();
      x.col(k).array() -= mean;
      const double var = x.col(k).squaredNorm() / (n - 1);
      if (var <= 0.0) {
        throw InvalidInput("covariate '" + names[k] + "' is constant");
      }
      x.col(k) /= std::sqrt(var);
    }
  }
  if (x.cols() > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() != x.cols()) {
      throw InvalidInput("covariate matrix is rank deficient");
    }
  }
  CovariateMatrix c;
  c.x = std::move(x);
  c.names = std::move(names);
  return c;
}

}  // namespace pipecut
