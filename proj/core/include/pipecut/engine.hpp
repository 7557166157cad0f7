#ifndef PIPECUT_ENGINE_HPP
#define PIPECUT_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pipecut/common.hpp"
#include "pipecut/covariates.hpp"
#include "pipecut/irt.hpp"
#include "pipecut/rng.hpp"
#include "pipecut/selection.hpp"

namespace pipecut {

struct ChainConfig {
  int chains = 2;
  int burn_in = 1000;
  int samples = 2000;     // stored draws per chain
  int thin = 1;
  int inner_steps = 200;  // cut inner chain length S
  double a1 = 1.0;        // false-negative loss weight
  double a2 = 1.0;        // false-positive loss weight
  std::uint64_t seed = 1;
  bool store_first_module = true;

  void validate() const;
  double threshold() const { return a2 / (a1 + a2); }
};

enum class Regime { Full, TwoStep, Cut, Working };

std::string regime_name(Regime r);
Regime regime_from_name(const std::string& name);

// Stored draws for one chain.  Rows index stored iterations.  First-module
// blocks are empty unless store_first_module was set; xi/eta blocks are
// empty for working-posterior runs.
struct ChainTrace {
  IntMatrix zeta;  // B x N
  IntMatrix xi;    // B x K
  Vector eta0;     // B
  Matrix eta;      // B x K
  Matrix beta0;    // B x N (optional)
  Matrix beta1;    // B x N (optional)
  Matrix mu;       // B x J (optional)
  Matrix alpha;    // B x J (optional)
  Matrix hyper;    // B x 6 (optional): rho_mu, kappa2_mu, rho_beta,
                   //                    sigma2_beta, kappa2_alpha, omega_alpha
};

extern const std::vector<std::string> kHyperNames;

struct PosteriorSamples {
  Regime regime = Regime::Working;
  ChainConfig config;
  Eigen::Index n_legislators = 0;
  Eigen::Index n_votes = 0;
  Eigen::Index n_covariates = 0;
  std::vector<std::string> covariate_names;
  std::vector<ChainTrace> chains;
  double wall_seconds = 0.0;

  Eigen::Index stored_per_chain() const {
    return chains.empty() ? 0 : chains.front().zeta.rows();
  }
  Eigen::Index total_stored() const {
    Eigen::Index t = 0;
    for (const auto& c : chains) t += c.zeta.rows();
    return t;
  }
};

// ---------------------------------------------------------------------------
// Generic chain runners.  A pipeline model must provide:
//   types  FirstState, SecondState, Zeta
//   FirstState  init_first(Rng&) const
//   SecondState init_second(Rng&) const
//   void sweep_first_working(FirstState&, Rng&) const
//   void sweep_first_conditional(FirstState&, const SecondState&, Rng&) const
//   void sweep_second(SecondState&, const Zeta&, Rng&) const
//   Zeta zeta_of(const FirstState&) const
//   bool first_finite(const FirstState&) const
//   bool second_finite(const SecondState&) const
// Both the IRT/selection pair and the linear-Gaussian pair satisfy this, so
// the same engine code is exercised against closed-form oracles.
// ---------------------------------------------------------------------------

namespace detail {

// Runs fn(i) for i in [0, n); tasks must be independent.  Results are
// deterministic regardless of thread count.
void parallel_for(long n, const std::function<void(long)>& fn);

inline void check_finite_or_throw(bool ok, long iteration) {
  if (!ok) {
    throw NumericalFailure("non-finite sampler state at iteration " +
                           std::to_string(iteration));
  }
}

}  // namespace detail

// Alternates the two blocked sweeps of the joint sampler; rec(first, second)
// is called for every stored draw.
template <class Model, class Rec>
void run_full_chain(const Model& m, int burn_in, int samples, int thin,
                    std::uint64_t seed, Rec&& rec) {
  Rng rng(seed);
  auto first = m.init_first(rng);
  auto second = m.init_second(rng);
  const long total = static_cast<long>(burn_in) +
                     static_cast<long>(samples) * static_cast<long>(thin);
  for (long it = 0; it < total; ++it) {
    m.sweep_first_conditional(first, second, rng);
    m.sweep_second(second, m.zeta_of(first), rng);
    if (it % 100 == 99) {
      detail::check_finite_or_throw(m.first_finite(first) && m.second_finite(second),
                           it);
    }
    if (it >= burn_in && (it - burn_in + 1) % thin == 0) rec(first, second);
  }
}

// First module alone under the working prior.
template <class Model, class Rec>
void run_working_chain(const Model& m, int burn_in, int samples, int thin,
                       std::uint64_t seed, Rec&& rec) {
  Rng rng(seed);
  auto first = m.init_first(rng);
  const long total = static_cast<long>(burn_in) +
                     static_cast<long>(samples) * static_cast<long>(thin);
  for (long it = 0; it < total; ++it) {
    m.sweep_first_working(first, rng);
    if (it % 100 == 99) detail::check_finite_or_throw(m.first_finite(first), it);
    if (it >= burn_in && (it - burn_in + 1) % thin == 0) rec(first);
  }
}

// Second module at a fixed plug-in zeta.
template <class Model, class Rec>
void run_second_fixed_chain(const Model& m, const typename Model::Zeta& zeta_hat,
                            int burn_in, int samples, int thin,
                            std::uint64_t seed, Rec&& rec) {
  Rng rng(seed);
  auto second = m.init_second(rng);
  const long total = static_cast<long>(burn_in) +
                     static_cast<long>(samples) * static_cast<long>(thin);
  for (long it = 0; it < total; ++it) {
    m.sweep_second(second, zeta_hat, rng);
    if (it % 100 == 99) detail::check_finite_or_throw(m.second_finite(second), it);
    if (it >= burn_in && (it - burn_in + 1) % thin == 0) rec(second);
  }
}

// Cut second stage: one independent inner chain of inner_steps sweeps per
// stored zeta draw, each from a fresh initialization with a seed derived
// from (master, stream, b).  Inner runs execute in parallel; rec(b, second)
// receives the final inner state and must be safe for concurrent calls on
// distinct b.
template <class Model, class Rec>
void run_cut_draws(const Model& m, const std::vector<typename Model::Zeta>& zetas,
                   int inner_steps, std::uint64_t master, std::uint64_t stream,
                   Rec&& rec) {
  detail::parallel_for(static_cast<long>(zetas.size()), [&](long b) {
    Rng rng(Rng::derive_seed(master, stream, static_cast<std::uint64_t>(b) + 1));
    auto second = m.init_second(rng);
    for (int s = 0; s < inner_steps; ++s) {
      m.sweep_second(second, zetas[static_cast<std::size_t>(b)], rng);
    }
    detail::check_finite_or_throw(m.second_finite(second), b);
    rec(b, second);
  });
}

// The concrete two-module pipeline of the roll-call application.
struct IrtSelectionModel {
  const RollCallData* data = nullptr;
  const CovariateMatrix* covs = nullptr;

  using FirstState = IrtState;
  using SecondState = SelectState;
  using Zeta = IntVector;

  FirstState init_first(Rng& rng) const { return initial_irt_state(*data, rng); }
  SecondState init_second(Rng&) const {
    return initial_select_state(data->n(), covs->k());
  }
  void sweep_first_working(FirstState& s, Rng& rng) const {
    irt_sweep(s, *data, WorkingBetaBinomial{}, rng);
  }
  void sweep_first_conditional(FirstState& s, const SecondState& sec,
                               Rng& rng) const {
    irt_sweep(s, *data, ConditionalLogistic{sec.eta0, sec.eta, covs->x}, rng);
  }
  void sweep_second(SecondState& s, const Zeta& zeta, Rng& rng) const {
    mwg_sweep(s, zeta, *covs, rng);
  }
  Zeta zeta_of(const FirstState& s) const { return s.zeta; }
  bool first_finite(const FirstState& s) const { return s.finite(); }
  bool second_finite(const SecondState& s) const { return s.finite(); }
};

// Orchestrated multi-chain runs for the roll-call pipeline.  All are pure
// functions of (data, covariates, config.seed): reruns are bit-identical,
// chains and cut inner runs execute in parallel with derived seeds.
PosteriorSamples run_full(const RollCallData& data, const CovariateMatrix& covs,
                          const ChainConfig& cfg);
PosteriorSamples run_working_first_level(const RollCallData& data,
                                         const ChainConfig& cfg);
PosteriorSamples run_two_step(const RollCallData& data,
                              const CovariateMatrix& covs,
                              const ChainConfig& cfg);
PosteriorSamples run_cut(const RollCallData& data, const CovariateMatrix& covs,
                         const ChainConfig& cfg);

// Posterior bridge probabilities averaged over every stored draw.
Vector zeta_inclusion_probabilities(const PosteriorSamples& samples);

// Thresholded point estimate: zeta_hat[i] = 1 iff the posterior probability
// strictly exceeds a2 / (a1 + a2).
IntVector point_estimate_zeta(const PosteriorSamples& samples, double a1,
                              double a2);

// Upper bound -log p_f(xi = 0 | Y) on KL(cut || full), estimated by the
// empirical frequency of the all-zero model in a full-posterior run.  When
// no draw hits the zero model the bound is reported as infinite along with
// the floor log(total draws).
struct KlBoundEstimate {
  double value = 0.0;
  bool infinite = false;
  std::size_t total_draws = 0;

  double floor_log() const { return std::log(static_cast<double>(total_draws)); }
};

KlBoundEstimate kl_bound_estimate(const PosteriorSamples& full_samples);

}  // namespace pipecut

#endif  // PIPECUT_ENGINE_HPP
