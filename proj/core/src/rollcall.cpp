#include "pipecut/rollcall.hpp"

#include <utility>

namespace pipecut {

RollCallData RollCallData::validated(IntMatrix votes, IntVector vote_type,
                                     std::vector<std::string> ids) {
  if (votes.rows() < 1 || votes.cols() < 1) {
    throw InvalidInput("roll-call matrix is empty");
  }
  if (vote_type.size() != votes.cols()) {
    throw InvalidInput("vote-type flags do not match the number of votes");
  }
  if (!ids.empty() && static_cast<Eigen::Index>(ids.size()) != votes.rows()) {
    throw InvalidInput("legislator ids do not match the number of rows");
  }
  bool any_final = false;
  bool any_procedural = false;
  for (Eigen::Index j = 0; j < vote_type.size(); ++j) {
    if (vote_type[j] == 1) {
      any_final = true;
    } else if (vote_type[j] == 0) {
      any_procedural = true;
    } else {
      throw InvalidInput("vote-type flags must be 0 or 1");
    }
  }
  if (!any_final || !any_procedural) {
    throw InvalidInput("both procedural and final-passage votes are required");
  }
  for (Eigen::Index i = 0; i < votes.rows(); ++i) {
    bool any = false;
    for (Eigen::Index j = 0; j < votes.cols(); ++j) {
      const int v = votes(i, j);
      if (v != 0 && v != 1 && v != -1) {
        throw InvalidInput("roll-call cells must be 0, 1, or NA");
      }
      any = any || v >= 0;
    }
    if (!any) throw InvalidInput("a legislator has no observed votes");
  }
  for (Eigen::Index j = 0; j < votes.cols(); ++j) {
    bool any = false;
    for (Eigen::Index i = 0; i < votes.rows(); ++i) any = any || votes(i, j) >= 0;
    if (!any) throw InvalidInput("a vote has no observed responses");
  }
  RollCallData d;
  d.votes = std::move(votes);
  d.vote_type = std::move(vote_type);
  d.legislator_ids = std::move(ids);
  return d;
}

}  // namespace pipecut
