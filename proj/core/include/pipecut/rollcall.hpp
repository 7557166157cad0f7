#ifndef PIPECUT_ROLLCALL_HPP
#define PIPECUT_ROLLCALL_HPP

#include <optional>
#include <string>
#include <vector>

#include "pipecut/common.hpp"
#include "pipecut/rng.hpp"

namespace pipecut {

// Binary roll-call matrix with a per-vote domain flag.  votes(i, j) is 1 for
// yea, 0 for nay, -1 for missing; vote_type[j] is 1 for final-passage votes
// and 0 for procedural ones.
struct RollCallData {
  IntMatrix votes;                          // N x J
  IntVector vote_type;                      // J
  std::vector<std::string> legislator_ids;  // optional, may be empty

  Eigen::Index n() const { return votes.rows(); }
  Eigen::Index j() const { return votes.cols(); }
  bool observed(Eigen::Index i, Eigen::Index jj) const {
    return votes(i, jj) >= 0;
  }

  // Enforces the load-time invariants: every legislator has at least one
  // observed vote, every vote at least one observed response, both domains
  // are present, and all cells are in {0, 1, -1}.
  static RollCallData validated(IntMatrix votes, IntVector vote_type,
                                std::vector<std::string> ids = {});
};

}  // namespace pipecut

#endif  // PIPECUT_ROLLCALL_HPP
