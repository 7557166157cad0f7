#ifndef PIPECUT_IO_HPP
#define PIPECUT_IO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pipecut/common.hpp"
#include "pipecut/covariates.hpp"
#include "pipecut/rollcall.hpp"

namespace pipecut {

// Shortest round-trippable decimal representation; used for every numeric
// file so reruns are byte-identical.
std::string format_double(double v);

// Dense numeric matrices travel as comma-separated text, row-major, with a
// leading "rows,cols" header line.
void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(const std::string& path);

// Roll-call file: header "legislator,v1,...,vJ", one row per legislator,
// cells 0 / 1 / NA.
void write_rollcall_csv(const std::string& path, const RollCallData& data);
// Vote-type file: header "vote_id,is_final_passage", J rows.
void write_votetypes_csv(const std::string& path, const RollCallData& data);
RollCallData read_rollcall(const std::string& rollcall_path,
                           const std::string& votetypes_path);

// Covariate file: header row of K names, N data rows aligned with the
// roll-call legislator order.
void write_covariates_csv(const std::string& path, const Matrix& x,
                          const std::vector<std::string>& names);
CovariateMatrix read_covariates(const std::string& path, bool standardize);

// Structured key-value text: one "key = value" per line, '#' comments.
using KeyValueMap = std::map<std::string, std::string>;
KeyValueMap read_key_value_file(const std::string& path);
void write_key_value_file(const std::string& path, const KeyValueMap& kv);

// FNV-1a 64-bit content hash, hex encoded; recorded in run manifests so a
// trace directory pins the exact inputs it was produced from.
std::string content_hash_hex(const std::string& path);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace pipecut

#endif  // PIPECUT_IO_HPP
