#include "pipecut/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace pipecut {

std::string format_double(double v) {
  char buf[40];
  // %.17g round-trips doubles; trim to the shortest that still does.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  return out;
}

double parse_double(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("malformed number '" + s + "' in " + path);
  }
}

long parse_long(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("malformed integer '" + s + "' in " + path);
  }
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void write_matrix_csv(const std::string& path, const Matrix& m) {
  auto out = open_out(path);
  out << m.rows() << ',' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path + " is empty");
  const auto dims = split_csv_line(line);
  if (dims.size() != 2) {
    throw InvalidInput(path + ": expected a 'rows,cols' header line");
  }
  const long rows = parse_long(trim(dims[0]), path);
  const long cols = parse_long(trim(dims[1]), path);
  if (rows < 0 || cols < 0) throw InvalidInput(path + ": negative dimensions");
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw InvalidInput(path + ": fewer rows than the header promises");
    }
    const auto cells = split_csv_line(line);
    if (static_cast<long>(cells.size()) != cols) {
      throw InvalidInput(path + ": row " + std::to_string(i + 1) +
                         " has the wrong number of columns");
    }
    for (long j = 0; j < cols; ++j) m(i, j) = parse_double(trim(cells[j]), path);
  }
  return m;
}

void write_rollcall_csv(const std::string& path, const RollCallData& data) {
  auto out = open_out(path);
  out << "legislator";
  for (Eigen::Index j = 0; j < data.j(); ++j) out << ",v" << (j + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.legislator_ids.empty()) {
      out << "L" << (i + 1);
    } else {
      out << data.legislator_ids[i];
    }
    for (Eigen::Index j = 0; j < data.j(); ++j) {
      out << ',';
      if (data.votes(i, j) < 0) {
        out << "NA";
      } else {
        out << data.votes(i, j);
      }
    }
    out << '\n';
  }
}

void write_votetypes_csv(const std::string& path, const RollCallData& data) {
  auto out = open_out(path);
  out << "vote_id,is_final_passage\n";
  for (Eigen::Index j = 0; j < data.j(); ++j) {
    out << 'v' << (j + 1) << ',' << data.vote_type[j] << '\n';
  }
}

RollCallData read_rollcall(const std::string& rollcall_path,
                           const std::string& votetypes_path) {
  auto in = open_in(rollcall_path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(rollcall_path + " is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 2) {
    throw InvalidInput(rollcall_path + ": header must name at least one vote");
  }
  const long j = static_cast<long>(header.size()) - 1;

  std::vector<std::string> ids;
  std::vector<std::vector<int>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<long>(cells.size()) != j + 1) {
      throw InvalidInput(rollcall_path + ": row " +
                         std::to_string(rows.size() + 2) +
                         " has the wrong number of columns");
    }
    ids.push_back(trim(cells[0]));
    std::vector<int> row(j);
    for (long c = 0; c < j; ++c) {
      const std::string cell = trim(cells[c + 1]);
      if (cell == "NA" || cell == "na" || cell.empty()) {
        row[c] = -1;
      } else if (cell == "0" || cell == "1") {
        row[c] = cell[0] - '0';
      } else {
        throw InvalidInput(rollcall_path + ": cell '" + cell +
                           "' is not 0, 1, or NA");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput(rollcall_path + " has no data rows");

  IntMatrix votes(static_cast<Eigen::Index>(rows.size()), j);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (long c = 0; c < j; ++c) votes(static_cast<Eigen::Index>(i), c) = rows[i][c];
  }

  auto vin = open_in(votetypes_path);
  if (!std::getline(vin, line)) throw InvalidInput(votetypes_path + " is empty");
  IntVector vote_type(j);
  long seen = 0;
  while (std::getline(vin, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2) {
      throw InvalidInput(votetypes_path + ": expected 'vote_id,is_final_passage'");
    }
    if (seen >= j) throw InvalidInput(votetypes_path + ": too many rows");
    const long flag = parse_long(trim(cells[1]), votetypes_path);
    if (flag != 0 && flag != 1) {
      throw InvalidInput(votetypes_path + ": is_final_passage must be 0 or 1");
    }
    vote_type[seen++] = static_cast<int>(flag);
  }
  if (seen != j) {
    throw InvalidInput(votetypes_path + ": expected " + std::to_string(j) +
                       " rows, found " + std::to_string(seen));
  }
  return RollCallData::validated(std::move(votes), std::move(vote_type),
                                 std::move(ids));
}

void write_covariates_csv(const std::string& path, const Matrix& x,
                          const std::vector<std::string>& names) {
  if (static_cast<Eigen::Index>(names.size()) != x.cols()) {
    throw InvalidInput("covariate names do not match the matrix");
  }
  auto out = open_out(path);
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (k) out << ',';
    out << names[k];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      if (k) out << ',';
      out << format_double(x(i, k));
    }
    out << '\n';
  }
}

CovariateMatrix read_covariates(const std::string& path, bool standardize) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path + " is empty");
  std::vector<std::string> names;
  for (auto& cell : split_csv_line(line)) names.push_back(trim(cell));
  const long k = static_cast<long>(names.size());

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<long>(cells.size()) != k) {
      throw InvalidInput(path + ": row " + std::to_string(rows.size() + 2) +
                         " has the wrong number of columns");
    }
    std::vector<double> row(k);
    for (long c = 0; c < k; ++c) row[c] = parse_double(trim(cells[c]), path);
    rows.push_back(std::move(row));
  }
  Matrix x(static_cast<Eigen::Index>(rows.size()), k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (long c = 0; c < k; ++c) x(static_cast<Eigen::Index>(i), c) = rows[i][c];
  }
  return CovariateMatrix::validated(std::move(x), std::move(names), standardize);
}

KeyValueMap read_key_value_file(const std::string& path) {
  auto in = open_in(path);
  KeyValueMap kv;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput(path + ":" + std::to_string(lineno) +
                         ": expected 'key = value'");
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) {
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

void write_key_value_file(const std::string& path, const KeyValueMap& kv) {
  auto out = open_out(path);
  for (const auto& [key, value] : kv) out << key << " = " << value << '\n';
}

std::string content_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "' for hashing");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace pipecut
