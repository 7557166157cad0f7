#include "pipecut/engine.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <thread>

namespace pipecut {

const std::vector<std::string> kHyperNames = {
    "rho_mu", "kappa2_mu", "rho_beta", "sigma2_beta", "kappa2_alpha",
    "omega_alpha"};

void ChainConfig::validate() const {
  if (chains < 1) throw InvalidInput("chains must be >= 1");
  if (burn_in < 0) throw InvalidInput("burn_in must be >= 0");
  if (samples < 1) throw InvalidInput("samples must be >= 1");
  if (thin < 1) throw InvalidInput("thin must be >= 1");
  if (inner_steps < 1) throw InvalidInput("inner_steps must be >= 1");
  if (!(a1 > 0.0) || !(a2 > 0.0)) {
    throw InvalidInput("loss weights a1 and a2 must be positive");
  }
}

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::Full: return "full";
    case Regime::TwoStep: return "twostep";
    case Regime::Cut: return "cut";
    case Regime::Working: return "working";
  }
  return "unknown";
}

Regime regime_from_name(const std::string& name) {
  if (name == "full") return Regime::Full;
  if (name == "twostep") return Regime::TwoStep;
  if (name == "cut") return Regime::Cut;
  if (name == "working") return Regime::Working;
  throw InvalidInput("unknown regime '" + name + "'");
}

namespace detail {

void parallel_for(long n, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  const unsigned hw = std::thread::hardware_concurrency();
  const long nthreads = std::min<long>(hw == 0 ? 1 : hw, n);
  if (nthreads <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::exception_ptr> errors(nthreads);
  std::vector<std::thread> threads;
  threads.reserve(nthreads);
  for (long t = 0; t < nthreads; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (;;) {
          const long i = next.fetch_add(1);
          if (i >= n) break;
          fn(i);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

ChainTrace allocate_trace(const ChainConfig& cfg, Eigen::Index n,
                          Eigen::Index j, Eigen::Index k, bool with_second,
                          bool with_first) {
  ChainTrace t;
  const Eigen::Index b = cfg.samples;
  t.zeta = IntMatrix::Zero(b, n);
  t.xi = IntMatrix::Zero(b, with_second ? k : 0);
  t.eta0 = Vector::Zero(with_second ? b : 0);
  t.eta = Matrix::Zero(b, with_second ? k : 0);
  if (with_first) {
    t.beta0 = Matrix::Zero(b, n);
    t.beta1 = Matrix::Zero(b, n);
    t.mu = Matrix::Zero(b, j);
    t.alpha = Matrix::Zero(b, j);
    t.hyper = Matrix::Zero(b, static_cast<Eigen::Index>(kHyperNames.size()));
  }
  return t;
}

void record_first(ChainTrace& t, Eigen::Index row, const IrtState& s) {
  t.zeta.row(row) = s.zeta.transpose();
  if (t.beta0.rows() == 0) return;
  t.beta0.row(row) = s.beta0.transpose();
  t.beta1.row(row) = s.beta1.transpose();
  t.mu.row(row) = s.mu.transpose();
  t.alpha.row(row) = s.alpha.transpose();
  t.hyper(row, 0) = s.rho_mu;
  t.hyper(row, 1) = s.kappa2_mu;
  t.hyper(row, 2) = s.rho_beta;
  t.hyper(row, 3) = s.sigma2_beta;
  t.hyper(row, 4) = s.kappa2_alpha;
  t.hyper(row, 5) = s.omega_alpha;
}

void record_second(ChainTrace& t, Eigen::Index row, const SelectState& s) {
  t.xi.row(row) = s.xi.transpose();
  t.eta0[row] = s.eta0;
  t.eta.row(row) = s.eta.transpose();
}

// Chains are run unconstrained; afterwards each chain is flipped so that
// the anchor legislator's mean procedural ideal point is nonnegative, which
// makes the sign-symmetric chains comparable.
void apply_sign_anchor(ChainTrace& t) {
  if (t.beta0.rows() == 0 || t.beta0.cols() == 0) return;
  if (t.beta0.col(0).mean() >= 0.0) return;
  t.beta0 = -t.beta0;
  t.beta1 = -t.beta1;
  t.alpha = -t.alpha;
  t.hyper.col(2) = -t.hyper.col(2);  // rho_beta
}

void log_chain_counters(const char* what, long chain, long clamps,
                        long rank_rejects) {
  if (clamps > 0) {
    std::cerr << what << " chain " << chain << ": clamped |theta| > 30 on "
              << clamps << " auxiliary draws\n";
  }
  if (rank_rejects > 0) {
    std::cerr << what << " chain " << chain << ": rejected " << rank_rejects
              << " moves into numerically singular models\n";
  }
}

PosteriorSamples make_samples(Regime regime, const ChainConfig& cfg,
                              const RollCallData& data, Eigen::Index k,
                              const std::vector<std::string>& names) {
  PosteriorSamples s;
  s.regime = regime;
  s.config = cfg;
  s.n_legislators = data.n();
  s.n_votes = data.j();
  s.n_covariates = k;
  s.covariate_names = names;
  s.chains.resize(cfg.chains);
  return s;
}

}  // namespace

PosteriorSamples run_working_first_level(const RollCallData& data,
                                         const ChainConfig& cfg) {
  cfg.validate();
  Timer timer;
  PosteriorSamples out = make_samples(Regime::Working, cfg, data, 0, {});
  IrtSelectionModel model{&data, nullptr};
  detail::parallel_for(cfg.chains, [&](long c) {
    ChainTrace trace = allocate_trace(cfg, data.n(), data.j(), 0,
                                      /*with_second=*/false,
                                      cfg.store_first_module);
    Eigen::Index row = 0;
    long clamps = 0;
    run_working_chain(model, cfg.burn_in, cfg.samples, cfg.thin,
                      Rng::derive_seed(cfg.seed, c, 0), [&](const IrtState& s) {
                        record_first(trace, row++, s);
                        clamps = s.overflow_clamps;
                      });
    log_chain_counters("working", c, clamps, 0);
    apply_sign_anchor(trace);
    out.chains[c] = std::move(trace);
  });
  out.wall_seconds = timer.seconds();
  return out;
}

PosteriorSamples run_full(const RollCallData& data, const CovariateMatrix& covs,
                          const ChainConfig& cfg) {
  cfg.validate();
  if (covs.n() != data.n()) {
    throw InvalidInput("covariate rows do not match the roll-call data");
  }
  Timer timer;
  PosteriorSamples out =
      make_samples(Regime::Full, cfg, data, covs.k(), covs.names);
  IrtSelectionModel model{&data, &covs};
  detail::parallel_for(cfg.chains, [&](long c) {
    ChainTrace trace = allocate_trace(cfg, data.n(), data.j(), covs.k(),
                                      /*with_second=*/true,
                                      cfg.store_first_module);
    Eigen::Index row = 0;
    long clamps = 0, rank_rejects = 0;
    run_full_chain(model, cfg.burn_in, cfg.samples, cfg.thin,
                   Rng::derive_seed(cfg.seed, c, 0),
                   [&](const IrtState& f, const SelectState& s) {
                     record_first(trace, row, f);
                     record_second(trace, row, s);
                     clamps = f.overflow_clamps;
                     rank_rejects = s.rank_rejections;
                     ++row;
                   });
    log_chain_counters("full", c, clamps, rank_rejects);
    apply_sign_anchor(trace);
    out.chains[c] = std::move(trace);
  });
  out.wall_seconds = timer.seconds();
  return out;
}

PosteriorSamples run_two_step(const RollCallData& data,
                              const CovariateMatrix& covs,
                              const ChainConfig& cfg) {
  cfg.validate();
  if (covs.n() != data.n()) {
    throw InvalidInput("covariate rows do not match the roll-call data");
  }
  Timer timer;
  const PosteriorSamples working = run_working_first_level(data, cfg);
  const IntVector zeta_hat = point_estimate_zeta(working, cfg.a1, cfg.a2);

  PosteriorSamples out =
      make_samples(Regime::TwoStep, cfg, data, covs.k(), covs.names);
  IrtSelectionModel model{&data, &covs};
  detail::parallel_for(cfg.chains, [&](long c) {
    ChainTrace trace = allocate_trace(cfg, data.n(), data.j(), covs.k(),
                                      /*with_second=*/true,
                                      /*with_first=*/false);
    Eigen::Index row = 0;
    run_second_fixed_chain(model, zeta_hat, cfg.burn_in, cfg.samples, cfg.thin,
                           Rng::derive_seed(cfg.seed, c, 1),
                           [&](const SelectState& s) {
                             trace.zeta.row(row) = zeta_hat.transpose();
                             record_second(trace, row, s);
                             ++row;
                           });
    out.chains[c] = std::move(trace);
  });
  out.wall_seconds = timer.seconds();
  return out;
}

PosteriorSamples run_cut(const RollCallData& data, const CovariateMatrix& covs,
                         const ChainConfig& cfg) {
  cfg.validate();
  if (covs.n() != data.n()) {
    throw InvalidInput("covariate rows do not match the roll-call data");
  }
  Timer timer;
  const PosteriorSamples working = run_working_first_level(data, cfg);

  PosteriorSamples out =
      make_samples(Regime::Cut, cfg, data, covs.k(), covs.names);
  IrtSelectionModel model{&data, &covs};
  for (int c = 0; c < cfg.chains; ++c) {
    const ChainTrace& wt = working.chains[c];
    ChainTrace trace = allocate_trace(cfg, data.n(), data.j(), covs.k(),
                                      /*with_second=*/true,
                                      cfg.store_first_module);
    // Each stored xi draw is paired with the zeta draw that conditioned it.
    trace.zeta = wt.zeta;
    trace.beta0 = wt.beta0;
    trace.beta1 = wt.beta1;
    trace.mu = wt.mu;
    trace.alpha = wt.alpha;
    trace.hyper = wt.hyper;

    std::vector<IntVector> zetas(wt.zeta.rows());
    for (Eigen::Index b = 0; b < wt.zeta.rows(); ++b) {
      zetas[b] = wt.zeta.row(b).transpose();
    }
    run_cut_draws(model, zetas, cfg.inner_steps, cfg.seed,
                  static_cast<std::uint64_t>(c),
                  [&](long b, const SelectState& s) {
                    record_second(trace, b, s);
                  });
    out.chains[c] = std::move(trace);
  }
  out.wall_seconds = timer.seconds();
  return out;
}

Vector zeta_inclusion_probabilities(const PosteriorSamples& samples) {
  if (samples.chains.empty() || samples.total_stored() == 0) {
    throw InvalidInput("no stored draws");
  }
  const Eigen::Index n = samples.chains.front().zeta.cols();
  Vector prob = Vector::Zero(n);
  double total = 0.0;
  for (const auto& c : samples.chains) {
    prob += c.zeta.cast<double>().colwise().sum().transpose();
    total += static_cast<double>(c.zeta.rows());
  }
  return prob / total;
}

IntVector point_estimate_zeta(const PosteriorSamples& samples, double a1,
                              double a2) {
  if (!(a1 + a2 > 0.0)) throw InvalidInput("a1 + a2 must be positive");
  const Vector prob = zeta_inclusion_probabilities(samples);
  const double threshold = a2 / (a1 + a2);
  IntVector zeta_hat(prob.size());
  for (Eigen::Index i = 0; i < prob.size(); ++i) {
    zeta_hat[i] = prob[i] > threshold ? 1 : 0;  // strict inequality
  }
  return zeta_hat;
}

KlBoundEstimate kl_bound_estimate(const PosteriorSamples& full_samples) {
  if (full_samples.regime != Regime::Full) {
    throw InvalidInput("kl_bound_estimate expects full-posterior samples");
  }
  KlBoundEstimate est;
  std::size_t zero_count = 0;
  for (const auto& c : full_samples.chains) {
    for (Eigen::Index b = 0; b < c.xi.rows(); ++b) {
      est.total_draws += 1;
      if ((c.xi.row(b).array() == 0).all()) ++zero_count;
    }
  }
  if (est.total_draws == 0) throw InvalidInput("empty traces");
  if (zero_count == 0) {
    est.infinite = true;
    est.value = std::numeric_limits<double>::infinity();
  } else {
    est.value = -std::log(static_cast<double>(zero_count) /
                          static_cast<double>(est.total_draws));
  }
  return est;
}

}  // namespace pipecut
