// Command-line front end: simulation, fitting, diagnostics, and comparison
// for two-module pipeline inference (full / two-step / cut).

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pipecut/diagnostics.hpp"
#include "pipecut/engine.hpp"
#include "pipecut/io.hpp"
#include "pipecut/irt.hpp"
#include "pipecut/linear_pipeline.hpp"
#include "pipecut/rng.hpp"
#include "pipecut/trace_io.hpp"
#include "svg_plots.hpp"

namespace fs = std::filesystem;
using pipecut::ChainConfig;
using pipecut::CovariateMatrix;
using pipecut::format_double;
using pipecut::IntVector;
using pipecut::InvalidInput;
using pipecut::KeyValueMap;
using pipecut::Matrix;
using pipecut::PosteriorKind;
using pipecut::Regime;
using pipecut::Rng;
using pipecut::Vector;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  return out;
}

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// ---------------------------------------------------------------------------
// simulate-linear
// ---------------------------------------------------------------------------

struct SimulateLinearOpts {
  long n = 20, j = 30, l = 2, k = 2;
  double sigma2 = 1.0, tau2 = 1.0;
  double sigma2_star = -1.0, tau2_star = -1.0;  // default: the fitted values
  std::uint64_t seed = 1;
  std::string out;
};

int run_simulate_linear(const SimulateLinearOpts& o) {
  ensure_dir(o.out);
  Rng rng(o.seed);
  auto random_matrix = [&](Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index jj = 0; jj < c; ++jj) m(i, jj) = rng.normal();
    return m;
  };
  const Matrix w = random_matrix(o.l, o.j);
  const Matrix x = random_matrix(o.n, o.k);
  pipecut::LinearPipelineConfig cfg(w, x, o.sigma2, o.tau2);
  const Matrix xi_true = random_matrix(o.k, o.l);
  const pipecut::TrueVariances truth(
      o.sigma2_star > 0.0 ? o.sigma2_star : o.sigma2,
      o.tau2_star > 0.0 ? o.tau2_star : o.tau2);
  const auto sim = simulate(cfg, xi_true, truth, rng);

  pipecut::write_matrix_csv(join_path(o.out, "W.csv"), w);
  pipecut::write_matrix_csv(join_path(o.out, "X.csv"), x);
  pipecut::write_matrix_csv(join_path(o.out, "Y.csv"), sim.y);
  pipecut::write_matrix_csv(join_path(o.out, "xi_true.csv"), xi_true);
  pipecut::write_matrix_csv(join_path(o.out, "zeta_true.csv"), sim.zeta);

  KeyValueMap manifest;
  manifest["command"] = "simulate-linear";
  manifest["n"] = std::to_string(o.n);
  manifest["j"] = std::to_string(o.j);
  manifest["l"] = std::to_string(o.l);
  manifest["k"] = std::to_string(o.k);
  manifest["sigma2"] = format_double(o.sigma2);
  manifest["tau2"] = format_double(o.tau2);
  manifest["sigma2_star"] = format_double(truth.sigma2_star);
  manifest["tau2_star"] = format_double(truth.tau2_star);
  manifest["seed"] = std::to_string(o.seed);
  for (const auto* name : {"W", "X", "Y", "xi_true", "zeta_true"}) {
    manifest[std::string("hash_") + name] = pipecut::content_hash_hex(
        join_path(o.out, std::string(name) + ".csv"));
  }
  pipecut::write_key_value_file(join_path(o.out, "manifest.txt"), manifest);
  std::cout << "simulate-linear: wrote Y (" << o.n << " x " << o.j << ") to "
            << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit-linear
// ---------------------------------------------------------------------------

struct FitLinearOpts {
  std::string y_path, w_path, x_path, out;
  double sigma2 = 1.0, tau2 = 1.0;
};

void print_matrix(std::ostream& os, const std::string& name, const Matrix& m) {
  os << name << " (" << m.rows() << " x " << m.cols() << "):\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << "  ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ", ";
      os << format_double(m(i, j));
    }
    os << "\n";
  }
}

int run_fit_linear(const FitLinearOpts& o) {
  const Matrix y = pipecut::read_matrix_csv(o.y_path);
  const Matrix w = pipecut::read_matrix_csv(o.w_path);
  const Matrix x = pipecut::read_matrix_csv(o.x_path);
  pipecut::LinearPipelineConfig cfg(w, x, o.sigma2, o.tau2);
  if (y.rows() != cfg.n() || y.cols() != cfg.j()) {
    throw InvalidInput("Y dimensions do not match W and X");
  }
  ensure_dir(o.out);

  struct Entry {
    const char* name;
    PosteriorKind kind;
  };
  const Entry entries[] = {{"full", PosteriorKind::Full},
                           {"twostep", PosteriorKind::TwoStep},
                           {"cut", PosteriorKind::Cut}};
  std::map<std::string, pipecut::MatrixNormal> posts;
  for (const auto& e : entries) {
    const auto post = closed_form_posterior(y, cfg, e.kind);
    print_matrix(std::cout, std::string("M_") + e.name, post.mean());
    print_matrix(std::cout, std::string("U_") + e.name, post.row_cov());
    print_matrix(std::cout, std::string("V_") + e.name, post.col_cov());
    pipecut::write_matrix_csv(
        join_path(o.out, std::string("posterior_") + e.name + "_mean.csv"),
        post.mean());
    pipecut::write_matrix_csv(
        join_path(o.out, std::string("posterior_") + e.name + "_row_cov.csv"),
        post.row_cov());
    pipecut::write_matrix_csv(
        join_path(o.out, std::string("posterior_") + e.name + "_col_cov.csv"),
        post.col_cov());
    posts.emplace(e.name, post);
  }

  const auto& full = posts.at("full");
  const auto& two = posts.at("twostep");
  const auto& cut = posts.at("cut");
  const double mean_gap = (two.mean() - cut.mean()).cwiseAbs().maxCoeff();
  const double var_gap = (full.col_cov() - cut.col_cov()).cwiseAbs().maxCoeff();
  const double tr_cut = cut.col_cov().trace() * cut.row_cov().trace();
  const double tr_two = two.col_cov().trace() * two.row_cov().trace();
  std::cout << "identity |M_t - M_c|_max = " << format_double(mean_gap) << "\n";
  std::cout << "identity |V_f - V_c|_max = " << format_double(var_gap) << "\n";
  std::cout << "trace(V_c (x) U_c) = " << format_double(tr_cut)
            << "  >  trace(V_t (x) U_t) = " << format_double(tr_two) << "\n";

  KeyValueMap manifest;
  manifest["command"] = "fit-linear";
  manifest["sigma2"] = format_double(o.sigma2);
  manifest["tau2"] = format_double(o.tau2);
  manifest["hash_Y"] = pipecut::content_hash_hex(o.y_path);
  manifest["hash_W"] = pipecut::content_hash_hex(o.w_path);
  manifest["hash_X"] = pipecut::content_hash_hex(o.x_path);
  manifest["mean_identity_gap"] = format_double(mean_gap);
  manifest["variance_identity_gap"] = format_double(var_gap);

  if (cfg.scalar()) {
    const auto lem = lemma1_quantities(cfg, y(0, 0));
    std::cout << "lemma1 KL(joint) = " << format_double(lem.kl_joint)
              << ", KL(marginal) = " << format_double(lem.kl_marginal) << "\n";
    manifest["lemma1_kl_joint"] = format_double(lem.kl_joint);
    manifest["lemma1_kl_marginal"] = format_double(lem.kl_marginal);
  }
  pipecut::write_key_value_file(join_path(o.out, "manifest.txt"), manifest);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate-rollcall
// ---------------------------------------------------------------------------

struct SimulateRollcallOpts {
  long n = 50, j = 100, k = 5, k_active = 2;
  double final_frac = 0.5, missing_frac = 0.0, bridge_frac = 0.5;
  double eta0 = 0.0, effect = 1.0;
  bool no_covariate_effects = false;
  std::uint64_t seed = 1;
  std::string out;
};

int run_simulate_rollcall(const SimulateRollcallOpts& o) {
  if (o.k_active > o.k) throw InvalidInput("k_active cannot exceed k");
  if (o.k < 0) throw InvalidInput("k must be nonnegative");
  ensure_dir(o.out);
  Rng rng(o.seed);

  pipecut::RollCallSimSettings st;
  st.n_legislators = o.n;
  st.n_votes = o.j;
  st.final_passage_frac = o.final_frac;
  st.missing_frac = o.missing_frac;
  st.bridge_frac = o.bridge_frac;

  Matrix x(o.n, o.k);
  Vector eta = Vector::Zero(o.k);
  for (Eigen::Index i = 0; i < o.n; ++i)
    for (Eigen::Index c = 0; c < o.k; ++c) x(i, c) = rng.normal();
  if (o.k > 0 && !o.no_covariate_effects) {
    for (long a = 0; a < o.k_active; ++a) {
      eta[a] = (a % 2 == 0 ? 1.0 : -1.0) * o.effect;
    }
    st.covariates = x;
    st.eta0 = o.eta0;
    st.eta = eta;
  }
  const auto sim = simulate_rollcall(st, rng);

  pipecut::write_rollcall_csv(join_path(o.out, "rollcall.csv"), sim.data);
  pipecut::write_votetypes_csv(join_path(o.out, "votetypes.csv"), sim.data);
  std::vector<std::string> names(o.k);
  for (long c = 0; c < o.k; ++c) names[c] = "x" + std::to_string(c + 1);
  pipecut::write_covariates_csv(join_path(o.out, "covariates.csv"), x, names);
  pipecut::write_matrix_csv(join_path(o.out, "truth_zeta.csv"),
                            sim.truth.zeta.cast<double>());
  pipecut::write_matrix_csv(join_path(o.out, "truth_eta.csv"), eta);
  pipecut::write_matrix_csv(join_path(o.out, "truth_beta0.csv"),
                            sim.truth.beta0);
  pipecut::write_matrix_csv(join_path(o.out, "truth_beta1.csv"),
                            sim.truth.beta1);

  KeyValueMap manifest;
  manifest["command"] = "simulate-rollcall";
  manifest["n"] = std::to_string(o.n);
  manifest["j"] = std::to_string(o.j);
  manifest["k"] = std::to_string(o.k);
  manifest["k_active"] = std::to_string(o.k_active);
  manifest["final_frac"] = format_double(o.final_frac);
  manifest["missing_frac"] = format_double(o.missing_frac);
  manifest["bridge_frac"] = format_double(o.bridge_frac);
  manifest["eta0"] = format_double(o.eta0);
  manifest["effect"] = format_double(o.effect);
  manifest["covariate_effects"] = o.no_covariate_effects ? "0" : "1";
  manifest["seed"] = std::to_string(o.seed);
  for (const auto* name : {"rollcall", "votetypes", "covariates"}) {
    manifest[std::string("hash_") + name] = pipecut::content_hash_hex(
        join_path(o.out, std::string(name) + ".csv"));
  }
  pipecut::write_key_value_file(join_path(o.out, "manifest.txt"), manifest);
  std::cout << "simulate-rollcall: wrote " << o.n << " x " << o.j
            << " roll-call data to " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitOpts {
  std::string regime = "full";
  std::string rollcall, votetypes, covariates, config, out;
  bool no_standardize = false;
  // Flag overrides; negative means "not given".
  long chains = -1, burn_in = -1, samples = -1, thin = -1, inner_steps = -1;
  double a1 = -1.0, a2 = -1.0;
  long long seed = -1;
  int store_first = -1;
};

ChainConfig resolve_chain_config(const FitOpts& o, KeyValueMap* resolved) {
  ChainConfig cfg;
  bool standardize = true;
  if (!o.config.empty()) {
    const auto kv = pipecut::read_key_value_file(o.config);
    for (const auto& [key, value] : kv) {
      try {
        if (key == "chains") {
          cfg.chains = std::stoi(value);
        } else if (key == "burn_in") {
          cfg.burn_in = std::stoi(value);
        } else if (key == "samples") {
          cfg.samples = std::stoi(value);
        } else if (key == "thin") {
          cfg.thin = std::stoi(value);
        } else if (key == "inner_steps") {
          cfg.inner_steps = std::stoi(value);
        } else if (key == "a1") {
          cfg.a1 = std::stod(value);
        } else if (key == "a2") {
          cfg.a2 = std::stod(value);
        } else if (key == "seed") {
          cfg.seed = std::stoull(value);
        } else if (key == "store_first_module") {
          cfg.store_first_module = value != "0";
        } else if (key == "standardize") {
          standardize = value != "0";
        } else {
          throw InvalidInput("unknown config key '" + key + "'");
        }
      } catch (const InvalidInput&) {
        throw;
      } catch (const std::exception&) {
        throw InvalidInput("malformed value for config key '" + key + "'");
      }
    }
  }
  if (o.chains >= 0) cfg.chains = static_cast<int>(o.chains);
  if (o.burn_in >= 0) cfg.burn_in = static_cast<int>(o.burn_in);
  if (o.samples >= 0) cfg.samples = static_cast<int>(o.samples);
  if (o.thin >= 0) cfg.thin = static_cast<int>(o.thin);
  if (o.inner_steps >= 0) cfg.inner_steps = static_cast<int>(o.inner_steps);
  if (o.a1 >= 0.0) cfg.a1 = o.a1;
  if (o.a2 >= 0.0) cfg.a2 = o.a2;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.store_first >= 0) cfg.store_first_module = o.store_first != 0;
  if (o.no_standardize) standardize = false;
  cfg.validate();
  (*resolved)["standardize"] = standardize ? "1" : "0";
  return cfg;
}

int run_fit(const FitOpts& o) {
  KeyValueMap extras;
  const ChainConfig cfg = resolve_chain_config(o, &extras);
  const bool standardize = extras.at("standardize") == "1";
  const Regime regime = pipecut::regime_from_name(o.regime);

  const auto data = pipecut::read_rollcall(o.rollcall, o.votetypes);
  extras["command"] = "fit";
  extras["hash_rollcall"] = pipecut::content_hash_hex(o.rollcall);
  extras["hash_votetypes"] = pipecut::content_hash_hex(o.votetypes);

  std::optional<CovariateMatrix> covs;
  if (!o.covariates.empty()) {
    covs = pipecut::read_covariates(o.covariates, standardize);
    if (covs->n() != data.n()) {
      throw InvalidInput("covariate rows do not match the roll-call data");
    }
    extras["hash_covariates"] = pipecut::content_hash_hex(o.covariates);
  } else if (regime != Regime::Working) {
    throw InvalidInput("--covariates is required unless --regime working");
  }

  pipecut::PosteriorSamples samples;
  try {
    switch (regime) {
      case Regime::Full:
        samples = run_full(data, *covs, cfg);
        break;
      case Regime::TwoStep:
        samples = run_two_step(data, *covs, cfg);
        break;
      case Regime::Cut:
        samples = run_cut(data, *covs, cfg);
        break;
      case Regime::Working:
        samples = run_working_first_level(data, cfg);
        break;
    }
  } catch (const pipecut::NumericalFailure& e) {
    // Leave a dump next to where the traces would have gone.
    ensure_dir(o.out);
    auto dump = open_out(join_path(o.out, "diagnostic_dump.txt"));
    dump << "error = " << e.what() << '\n';
    dump << "regime = " << o.regime << '\n';
    for (const auto& [key, value] : extras) {
      dump << key << " = " << value << '\n';
    }
    dump << "chains = " << cfg.chains << "\nburn_in = " << cfg.burn_in
         << "\nsamples = " << cfg.samples << "\nthin = " << cfg.thin
         << "\nseed = " << cfg.seed << '\n';
    throw;
  }
  ensure_dir(o.out);
  write_samples(o.out, samples, extras);
  std::cerr << "fit --regime " << o.regime << ": " << cfg.chains << " chains x "
            << cfg.samples << " stored draws in "
            << format_double(samples.wall_seconds) << " s\n";
  std::cout << "wrote traces to " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

void write_report_files(const std::string& out,
                        const pipecut::DiagnosticsReport& rep,
                        const pipecut::PosteriorSamples& samples) {
  {
    auto f = open_out(join_path(out, "rhat.csv"));
    f << "parameter,rhat\n";
    for (std::size_t i = 0; i < rep.rhat_names.size(); ++i) {
      f << rep.rhat_names[i] << ',' << format_double(rep.rhat_values[i]) << '\n';
    }
  }
  if (rep.pips.size() > 0 || samples.regime != Regime::Working) {
    auto f = open_out(join_path(out, "pip.csv"));
    f << "covariate,pip,in_median_model\n";
    for (Eigen::Index k = 0; k < rep.pips.size(); ++k) {
      f << samples.covariate_names[k] << ',' << format_double(rep.pips[k])
        << ',' << rep.median[k] << '\n';
    }
  }
  {
    auto f = open_out(join_path(out, "bridging_frequency.csv"));
    f << "mean,lo95,hi95\n";
    f << format_double(rep.bf.mean) << ',' << format_double(rep.bf.lo95) << ','
      << format_double(rep.bf.hi95) << '\n';
  }
  if (rep.cumulative_prob.size() > 0) {
    auto f = open_out(join_path(out, "cumulative_model_prob.csv"));
    f << "rank,cumulative_probability\n";
    for (Eigen::Index r = 0; r < rep.cumulative_prob.size(); ++r) {
      f << (r + 1) << ',' << format_double(rep.cumulative_prob[r]) << '\n';
    }
  }
  if (!rep.odds_ratios.empty()) {
    auto f = open_out(join_path(out, "odds_ratios.csv"));
    // Intervals are conditional on inclusion (draws with xi_k = 1).
    f << "covariate,pip,ever_included,mean_or,lo95,hi95\n";
    for (const auto& row : rep.odds_ratios) {
      f << row.name << ',' << format_double(row.pip) << ','
        << (row.ever_included ? 1 : 0) << ',';
      if (row.ever_included) {
        f << format_double(row.mean) << ',' << format_double(row.lo95) << ','
          << format_double(row.hi95) << '\n';
      } else {
        f << "NA,NA,NA\n";
      }
    }
  }
  if (rep.has_kl_bound) {
    auto f = open_out(join_path(out, "kl_bound.txt"));
    if (rep.kl_bound.infinite) {
      f << "kl_bound = inf\n";
      f << "note = no draw hit the zero model; bound exceeds log(draws) = "
        << format_double(rep.kl_bound.floor_log()) << '\n';
    } else {
      f << "kl_bound = " << format_double(rep.kl_bound.value) << '\n';
    }
    f << "total_draws = " << rep.kl_bound.total_draws << '\n';
  }
}

int run_diagnose(const std::string& traces, const std::string& out, int top) {
  const auto loaded = pipecut::read_samples(traces);
  const auto rep = diagnose(loaded.samples, top);
  ensure_dir(out);
  write_report_files(out, rep, loaded.samples);

  std::cout << "regime: " << regime_name(loaded.samples.regime) << "\n";
  std::cout << "bridging frequency: " << format_double(rep.bf.mean) << " ["
            << format_double(rep.bf.lo95) << ", " << format_double(rep.bf.hi95)
            << "]\n";
  if (rep.pips.size() > 0) {
    std::cout << "median model:";
    bool any = false;
    for (Eigen::Index k = 0; k < rep.pips.size(); ++k) {
      if (rep.median[k] == 1) {
        std::cout << ' ' << loaded.samples.covariate_names[k];
        any = true;
      }
    }
    if (!any) std::cout << " (empty)";
    std::cout << "\n";
  }
  for (std::size_t i = 0; i < rep.rhat_names.size(); ++i) {
    std::cout << "rhat[" << rep.rhat_names[i]
              << "] = " << format_double(rep.rhat_values[i]) << "\n";
  }
  if (rep.has_kl_bound) {
    std::cout << "kl bound: "
              << (rep.kl_bound.infinite
                      ? std::string("inf (exceeds log(draws) = ") +
                            format_double(rep.kl_bound.floor_log()) + ")"
                      : format_double(rep.kl_bound.value))
              << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

int run_compare(const std::vector<std::string>& trace_dirs,
                const std::string& out, int top,
                const std::vector<std::string>& odds_scales) {
  if (trace_dirs.size() < 2) {
    throw InvalidInput("compare needs at least two trace directories");
  }
  std::vector<pipecut::PosteriorSamples> runs;
  std::vector<std::string> labels;
  for (const auto& dir : trace_dirs) {
    auto loaded = pipecut::read_samples(dir);
    std::string label = regime_name(loaded.samples.regime);
    int suffix = 2;
    while (std::find(labels.begin(), labels.end(), label) != labels.end()) {
      label = regime_name(loaded.samples.regime) + std::to_string(suffix++);
    }
    labels.push_back(label);
    runs.push_back(std::move(loaded.samples));
  }
  const auto names = runs.front().covariate_names;
  const Eigen::Index k = runs.front().n_covariates;
  for (const auto& r : runs) {
    if (r.regime == Regime::Working) {
      throw InvalidInput("compare: working runs have no second module");
    }
    if (r.n_covariates != k || r.covariate_names != names) {
      throw InvalidInput("compare: runs disagree on the covariate set");
    }
  }
  Vector scale = Vector::Ones(k);
  for (const auto& entry : odds_scales) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput("--odds-scale expects NAME=VALUE");
    }
    const std::string name = entry.substr(0, eq);
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw InvalidInput("unknown covariate '" + name + "'");
    scale[it - names.begin()] = std::stod(entry.substr(eq + 1));
  }

  ensure_dir(out);
  std::vector<Vector> pips;
  std::vector<IntVector> medians;
  std::vector<pipecut::BridgingFrequencySummary> bfs;
  std::vector<Vector> curves;
  std::vector<std::vector<pipecut::OddsRatioSummary>> odds;
  for (const auto& r : runs) {
    pips.push_back(pip(r));
    medians.push_back(pipecut::median_model(pips.back()));
    bfs.push_back(bridging_frequency(r));
    curves.push_back(cumulative_model_prob(r, top));
    odds.push_back(odds_ratio_summary(r, scale));
  }

  {
    auto f = open_out(join_path(out, "pip_table.csv"));
    f << "covariate";
    for (const auto& l : labels) f << ',' << l;
    f << '\n';
    for (Eigen::Index c = 0; c < k; ++c) {
      f << names[c];
      for (std::size_t r = 0; r < runs.size(); ++r) {
        f << ',' << format_double(pips[r][c]);
      }
      f << '\n';
    }
  }
  {
    auto f = open_out(join_path(out, "median_models.csv"));
    f << "covariate";
    for (const auto& l : labels) f << ',' << l;
    f << '\n';
    for (Eigen::Index c = 0; c < k; ++c) {
      f << names[c];
      for (std::size_t r = 0; r < runs.size(); ++r) f << ',' << medians[r][c];
      f << '\n';
    }
  }
  {
    auto f = open_out(join_path(out, "model_size.csv"));
    f << "regime,median_model_size\n";
    for (std::size_t r = 0; r < runs.size(); ++r) {
      f << labels[r] << ',' << medians[r].sum() << '\n';
    }
  }
  {
    auto f = open_out(join_path(out, "bf_table.csv"));
    f << "regime,mean,lo95,hi95\n";
    for (std::size_t r = 0; r < runs.size(); ++r) {
      f << labels[r] << ',' << format_double(bfs[r].mean) << ','
        << format_double(bfs[r].lo95) << ',' << format_double(bfs[r].hi95)
        << '\n';
    }
  }
  {
    auto f = open_out(join_path(out, "cumulative_model_prob.csv"));
    f << "rank";
    for (const auto& l : labels) f << ',' << l;
    f << '\n';
    for (int r = 0; r < top; ++r) {
      f << (r + 1);
      for (std::size_t run = 0; run < runs.size(); ++run) {
        f << ',' << format_double(curves[run][r]);
      }
      f << '\n';
    }
  }
  {
    auto f = open_out(join_path(out, "odds_ratios.csv"));
    // Intervals are conditional on inclusion (draws with xi_k = 1).
    f << "covariate,regime,pip,ever_included,mean_or,lo95,hi95\n";
    for (Eigen::Index c = 0; c < k; ++c) {
      for (std::size_t r = 0; r < runs.size(); ++r) {
        const auto& o = odds[r][c];
        f << names[c] << ',' << labels[r] << ',' << format_double(o.pip) << ','
          << (o.ever_included ? 1 : 0) << ',';
        if (o.ever_included) {
          f << format_double(o.mean) << ',' << format_double(o.lo95) << ','
            << format_double(o.hi95) << '\n';
        } else {
          f << "NA,NA,NA\n";
        }
      }
    }
  }

  // SVG plots mirroring the tables.
  {
    std::vector<pipecut_cli::Series> series;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      pipecut_cli::Series s;
      s.label = labels[r];
      for (Eigen::Index i = 0; i < curves[r].size(); ++i) {
        s.ys.push_back(curves[r][i]);
      }
      series.push_back(std::move(s));
    }
    pipecut_cli::write_line_chart_svg(
        join_path(out, "cumulative_model_prob.svg"),
        "Cumulative posterior probability of the top models", "model rank",
        "cumulative probability", series);
  }
  {
    std::vector<pipecut_cli::Series> series;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      series.push_back({labels[r], {static_cast<double>(medians[r].sum())}});
    }
    pipecut_cli::write_bar_chart_svg(join_path(out, "model_size.svg"),
                                     "Median model size by regime",
                                     {"median model"}, series);
  }
  if (k > 0) {
    std::vector<std::vector<double>> grid(k);
    for (Eigen::Index c = 0; c < k; ++c) {
      for (std::size_t r = 0; r < runs.size(); ++r) {
        grid[c].push_back(pips[r][c]);
      }
    }
    pipecut_cli::write_heatmap_svg(join_path(out, "pip_heatmap.svg"),
                                   "Posterior inclusion probabilities", names,
                                   labels, grid);
    std::vector<pipecut_cli::IntervalRow> rows;
    for (Eigen::Index c = 0; c < k; ++c) {
      pipecut_cli::IntervalRow row;
      row.label = names[c];
      for (std::size_t r = 0; r < runs.size(); ++r) {
        const auto& o = odds[r][c];
        row.mean.push_back(o.ever_included ? o.mean : 1.0);
        row.lo.push_back(o.ever_included ? o.lo95 : 1.0);
        row.hi.push_back(o.ever_included ? o.hi95 : 1.0);
        row.emphasized.push_back(medians[r][c] == 1);
      }
      rows.push_back(std::move(row));
    }
    pipecut_cli::write_interval_plot_svg(
        join_path(out, "odds_ratios.svg"),
        "Odds-ratio posterior means and 95% intervals (log scale)", labels,
        rows, true);
  }

  std::cout << "compare: wrote tables and plots for " << runs.size()
            << " runs to " << out << "\n";
  std::cout << "regime,median_model_size\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::cout << labels[r] << ',' << medians[r].sum() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full, two-step, and cut Bayesian inference for two-module "
               "data-analysis pipelines"};
  app.require_subcommand(1);

  SimulateLinearOpts sl;
  auto* sim_linear = app.add_subcommand(
      "simulate-linear", "Generate a synthetic matrix-variate linear dataset");
  sim_linear->add_option("--n", sl.n, "rows of Y");
  sim_linear->add_option("--j", sl.j, "columns of Y");
  sim_linear->add_option("--l", sl.l, "rows of W");
  sim_linear->add_option("--k", sl.k, "columns of X");
  sim_linear->add_option("--sigma2", sl.sigma2, "fitted sigma^2");
  sim_linear->add_option("--tau2", sl.tau2, "fitted tau^2");
  sim_linear->add_option("--sigma2-star", sl.sigma2_star,
                         "true sigma^2 (defaults to --sigma2)");
  sim_linear->add_option("--tau2-star", sl.tau2_star,
                         "true tau^2 (defaults to --tau2)");
  sim_linear->add_option("--seed", sl.seed, "random seed");
  sim_linear->add_option("--out", sl.out, "output directory")->required();

  FitLinearOpts fl;
  auto* fit_linear = app.add_subcommand(
      "fit-linear",
      "Closed-form full/two-step/cut posteriors for the linear pipeline");
  fit_linear->add_option("--y", fl.y_path, "Y matrix file")->required();
  fit_linear->add_option("--w", fl.w_path, "W matrix file")->required();
  fit_linear->add_option("--x", fl.x_path, "X matrix file")->required();
  fit_linear->add_option("--sigma2", fl.sigma2, "fitted sigma^2");
  fit_linear->add_option("--tau2", fl.tau2, "fitted tau^2");
  fit_linear->add_option("--out", fl.out, "output directory")->required();

  SimulateRollcallOpts sr;
  auto* sim_rc = app.add_subcommand(
      "simulate-rollcall", "Generate synthetic roll-call data with covariates");
  sim_rc->add_option("--n", sr.n, "legislators");
  sim_rc->add_option("--j", sr.j, "votes");
  sim_rc->add_option("--k", sr.k, "covariates");
  sim_rc->add_option("--k-active", sr.k_active, "covariates with true effect");
  sim_rc->add_option("--final-frac", sr.final_frac, "final-passage fraction");
  sim_rc->add_option("--missing-frac", sr.missing_frac, "missing-cell fraction");
  sim_rc->add_option("--bridge-frac", sr.bridge_frac,
                     "bridge fraction (used without covariate effects)");
  sim_rc->add_option("--eta0", sr.eta0, "true intercept");
  sim_rc->add_option("--effect", sr.effect, "true effect size");
  sim_rc->add_flag("--no-covariate-effects", sr.no_covariate_effects,
                   "draw zeta from the bridge fraction instead of the "
                   "logistic model");
  sim_rc->add_option("--seed", sr.seed, "random seed");
  sim_rc->add_option("--out", sr.out, "output directory")->required();

  FitOpts fo;
  auto* fit = app.add_subcommand("fit", "Run MCMC for one inference regime");
  fit->add_option("--regime", fo.regime, "full | twostep | cut | working")
      ->check(CLI::IsMember({"full", "twostep", "cut", "working"}));
  fit->add_option("--rollcall", fo.rollcall, "roll-call CSV")->required();
  fit->add_option("--votetypes", fo.votetypes, "vote-type CSV")->required();
  fit->add_option("--covariates", fo.covariates, "covariate CSV");
  fit->add_option("--config", fo.config, "key-value config file");
  fit->add_option("--out", fo.out, "output trace directory")->required();
  fit->add_option("--chains", fo.chains, "number of chains");
  fit->add_option("--burn-in", fo.burn_in, "burn-in iterations");
  fit->add_option("--samples", fo.samples, "stored draws per chain");
  fit->add_option("--thin", fo.thin, "thinning interval");
  fit->add_option("--inner-steps", fo.inner_steps, "cut inner chain length");
  fit->add_option("--a1", fo.a1, "false-negative loss weight");
  fit->add_option("--a2", fo.a2, "false-positive loss weight");
  fit->add_option("--seed", fo.seed, "random seed");
  fit->add_option("--store-first", fo.store_first,
                  "store first-module traces (0/1)");
  fit->add_flag("--no-standardize", fo.no_standardize,
                "keep covariates on their raw scale");

  std::string diag_traces, diag_out;
  int diag_top = 100;
  auto* diag = app.add_subcommand(
      "diagnose", "Summaries and convergence diagnostics for a trace directory");
  diag->add_option("--traces", diag_traces, "trace directory")->required();
  diag->add_option("--out", diag_out, "report directory")->required();
  diag->add_option("--top", diag_top, "models in the cumulative curve");

  std::vector<std::string> cmp_dirs;
  std::string cmp_out;
  int cmp_top = 100;
  std::vector<std::string> cmp_scales;
  auto* cmp =
      app.add_subcommand("compare", "Side-by-side tables and plots across runs");
  cmp->add_option("--traces", cmp_dirs, "trace directories (two or more)")
      ->required()
      ->expected(-2);
  cmp->add_option("--out", cmp_out, "output directory")->required();
  cmp->add_option("--top", cmp_top, "models in the cumulative curves");
  cmp->add_option("--odds-scale", cmp_scales,
                  "per-covariate odds-ratio scale NAME=VALUE");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    if (sim_linear->parsed()) return run_simulate_linear(sl);
    if (fit_linear->parsed()) return run_fit_linear(fl);
    if (sim_rc->parsed()) return run_simulate_rollcall(sr);
    if (fit->parsed()) return run_fit(fo);
    if (diag->parsed()) return run_diagnose(diag_traces, diag_out, diag_top);
    if (cmp->parsed()) return run_compare(cmp_dirs, cmp_out, cmp_top, cmp_scales);
  } catch (const pipecut::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
