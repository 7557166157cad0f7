#include <benchmark/benchmark.h>

#include "pipecut/covariates.hpp"
#include "pipecut/irt.hpp"
#include "pipecut/rng.hpp"
#include "pipecut/selection.hpp"

namespace {

using pipecut::Matrix;
using pipecut::Rng;

void BM_IrtSweep(benchmark::State& state) {
  pipecut::RollCallSimSettings st;
  st.n_legislators = state.range(0);
  st.n_votes = 4 * state.range(0);
  Rng gen(4);
  const auto sim = simulate_rollcall(st, gen);
  Rng rng(5);
  auto s = initial_irt_state(sim.data, rng);
  for (auto _ : state) {
    irt_sweep(s, sim.data, pipecut::WorkingBetaBinomial{}, rng);
  }
  state.SetItemsProcessed(state.iterations() * sim.data.n() * sim.data.j());
}
BENCHMARK(BM_IrtSweep)->Arg(25)->Arg(50)->Arg(100);

void BM_MwgSweep(benchmark::State& state) {
  const Eigen::Index n = 100;
  const Eigen::Index k = state.range(0);
  Rng gen(6);
  Matrix x(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < k; ++c) x(i, c) = gen.normal();
  const auto covs = pipecut::CovariateMatrix::validated(x, {}, true);
  pipecut::IntVector zeta(n);
  for (Eigen::Index i = 0; i < n; ++i) zeta[i] = gen.bernoulli(0.5) ? 1 : 0;
  Rng rng(7);
  auto s = pipecut::initial_select_state(n, k);
  for (auto _ : state) {
    mwg_sweep(s, zeta, covs, rng);
  }
}
BENCHMARK(BM_MwgSweep)->Arg(2)->Arg(8)->Arg(21);

}  // namespace
