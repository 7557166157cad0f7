#ifndef PIPECUT_COVARIATES_HPP
#define PIPECUT_COVARIATES_HPP

#include <string>
#include <vector>

#include "pipecut/common.hpp"

namespace pipecut {

// Legislator-level design matrix for the selection module.  Columns are
// standardized to mean 0 / variance 1 at load unless disabled; full column
// rank is required.  K = 0 (no covariates) is allowed.
struct CovariateMatrix {
  Matrix x;  // N x K
  std::vector<std::string> names;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index k() const { return x.cols(); }

  static CovariateMatrix validated(Matrix x, std::vector<std::string> names,
                                   bool standardize = true);
};

}  // namespace pipecut

#endif  // PIPECUT_COVARIATES_HPP
