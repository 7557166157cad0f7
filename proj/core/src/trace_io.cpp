#include "pipecut/trace_io.hpp"

#include <filesystem>
#include <fstream>

namespace pipecut {

namespace fs = std::filesystem;

namespace {

void write_int_block(const std::string& path, const IntMatrix& m,
                     const std::string& prefix) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (c) out << ',';
    out << prefix << (c + 1);
  }
  out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << m(r, c);
    }
    out << '\n';
  }
}

void write_real_block(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (c) out << ',';
    out << names[c];
  }
  out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> names(n);
  for (Eigen::Index i = 0; i < n; ++i) names[i] = prefix + std::to_string(i + 1);
  return names;
}

IntMatrix read_int_block(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path + " is empty");
  const long cols =
      line.empty() ? 0 : static_cast<long>(split_csv_line(line).size());
  std::vector<std::vector<int>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<long>(cells.size()) != cols) {
      throw InvalidInput(path + ": ragged rows");
    }
    std::vector<int> row(cols);
    for (long c = 0; c < cols; ++c) row[c] = std::stoi(cells[c]);
    rows.push_back(std::move(row));
  }
  IntMatrix m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (long c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][c];
  }
  return m;
}

Matrix read_real_block(const std::string& path,
                       std::vector<std::string>* names = nullptr) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path + " is empty");
  std::vector<std::string> header =
      line.empty() ? std::vector<std::string>() : split_csv_line(line);
  const long cols = static_cast<long>(header.size());
  if (names) *names = header;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<long>(cells.size()) != cols) {
      throw InvalidInput(path + ": ragged rows");
    }
    std::vector<double> row(cols);
    for (long c = 0; c < cols; ++c) row[c] = std::stod(cells[c]);
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (long c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][c];
  }
  return m;
}

std::string chain_file(const std::string& dir, int c, const std::string& block) {
  return dir + "/chain" + std::to_string(c) + "_" + block + ".csv";
}

}  // namespace

void write_samples(const std::string& dir, const PosteriorSamples& samples,
                   const KeyValueMap& extra_manifest) {
  fs::create_directories(dir);
  const bool has_second =
      !samples.chains.empty() && samples.chains.front().eta0.size() > 0;
  const bool has_first =
      !samples.chains.empty() && samples.chains.front().beta0.rows() > 0;

  for (int c = 0; c < static_cast<int>(samples.chains.size()); ++c) {
    const ChainTrace& t = samples.chains[c];
    write_int_block(chain_file(dir, c, "zeta"), t.zeta, "zeta_");
    if (has_second) {
      write_int_block(chain_file(dir, c, "xi"), t.xi, "xi_");
      write_real_block(chain_file(dir, c, "eta0"), t.eta0, {"eta0"});
      std::vector<std::string> eta_names;
      for (const auto& n : samples.covariate_names) eta_names.push_back("eta_" + n);
      write_real_block(chain_file(dir, c, "eta"), t.eta, eta_names);
    }
    if (has_first) {
      write_real_block(chain_file(dir, c, "beta0"), t.beta0,
                       numbered("beta0_", t.beta0.cols()));
      write_real_block(chain_file(dir, c, "beta1"), t.beta1,
                       numbered("beta1_", t.beta1.cols()));
      write_real_block(chain_file(dir, c, "mu"), t.mu,
                       numbered("mu_", t.mu.cols()));
      write_real_block(chain_file(dir, c, "alpha"), t.alpha,
                       numbered("alpha_", t.alpha.cols()));
      write_real_block(chain_file(dir, c, "hyper"), t.hyper, kHyperNames);
    }
  }

  KeyValueMap manifest = extra_manifest;
  manifest["format_version"] = "1";
  manifest["regime"] = regime_name(samples.regime);
  manifest["chains"] = std::to_string(samples.chains.size());
  manifest["samples"] = std::to_string(samples.stored_per_chain());
  manifest["burn_in"] = std::to_string(samples.config.burn_in);
  manifest["thin"] = std::to_string(samples.config.thin);
  manifest["inner_steps"] = std::to_string(samples.config.inner_steps);
  manifest["a1"] = format_double(samples.config.a1);
  manifest["a2"] = format_double(samples.config.a2);
  manifest["seed"] = std::to_string(samples.config.seed);
  manifest["store_first_module"] = has_first ? "1" : "0";
  manifest["n_legislators"] = std::to_string(samples.n_legislators);
  manifest["n_votes"] = std::to_string(samples.n_votes);
  manifest["n_covariates"] = std::to_string(samples.n_covariates);
  {
    std::string joined;
    for (std::size_t i = 0; i < samples.covariate_names.size(); ++i) {
      if (i) joined += ",";
      joined += samples.covariate_names[i];
    }
    manifest["covariate_names"] = joined;
  }
  // Manifest last: readers treat its presence as directory-complete.
  write_key_value_file(dir + "/manifest.txt", manifest);
}

LoadedSamples read_samples(const std::string& dir) {
  const std::string manifest_path = dir + "/manifest.txt";
  if (!fs::exists(manifest_path)) {
    throw InvalidInput(dir + " has no manifest.txt (incomplete run?)");
  }
  LoadedSamples out;
  out.manifest = read_key_value_file(manifest_path);
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = out.manifest.find(key);
    if (it == out.manifest.end()) {
      throw InvalidInput(dir + ": manifest is missing '" + key + "'");
    }
    return it->second;
  };

  PosteriorSamples& s = out.samples;
  s.regime = regime_from_name(need("regime"));
  const int chains = std::stoi(need("chains"));
  s.config.chains = chains;
  s.config.samples = std::stoi(need("samples"));
  s.config.burn_in = std::stoi(need("burn_in"));
  s.config.thin = std::stoi(need("thin"));
  s.config.inner_steps = std::stoi(need("inner_steps"));
  s.config.a1 = std::stod(need("a1"));
  s.config.a2 = std::stod(need("a2"));
  s.config.seed = std::stoull(need("seed"));
  s.config.store_first_module = need("store_first_module") == "1";
  s.n_legislators = std::stol(need("n_legislators"));
  s.n_votes = std::stol(need("n_votes"));
  s.n_covariates = std::stol(need("n_covariates"));
  if (!need("covariate_names").empty()) {
    for (auto& name : split_csv_line(need("covariate_names"))) {
      s.covariate_names.push_back(name);
    }
  }

  const bool has_second = s.regime != Regime::Working;
  s.chains.resize(chains);
  for (int c = 0; c < chains; ++c) {
    ChainTrace& t = s.chains[c];
    t.zeta = read_int_block(chain_file(dir, c, "zeta"));
    if (has_second) {
      t.xi = read_int_block(chain_file(dir, c, "xi"));
      const Matrix eta0 = read_real_block(chain_file(dir, c, "eta0"));
      t.eta0 = eta0.col(0);
      t.eta = read_real_block(chain_file(dir, c, "eta"));
      // Zero-covariate blocks round-trip as 0 x 0; restore the row count.
      if (t.xi.cols() == 0) t.xi = IntMatrix::Zero(t.zeta.rows(), 0);
      if (t.eta.cols() == 0) t.eta = Matrix::Zero(t.zeta.rows(), 0);
    } else {
      t.xi = IntMatrix::Zero(t.zeta.rows(), 0);
      t.eta = Matrix::Zero(t.zeta.rows(), 0);
    }
    if (s.config.store_first_module) {
      t.beta0 = read_real_block(chain_file(dir, c, "beta0"));
      t.beta1 = read_real_block(chain_file(dir, c, "beta1"));
      t.mu = read_real_block(chain_file(dir, c, "mu"));
      t.alpha = read_real_block(chain_file(dir, c, "alpha"));
      t.hyper = read_real_block(chain_file(dir, c, "hyper"));
    }
  }
  return out;
}

}  // namespace pipecut
