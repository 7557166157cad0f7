#include <benchmark/benchmark.h>

#include "pipecut/linear_pipeline.hpp"
#include "pipecut/rng.hpp"

namespace {

using pipecut::Matrix;
using pipecut::Rng;

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

void BM_ClosedFormFull(benchmark::State& state) {
  const Eigen::Index j = state.range(0);
  Rng rng(8);
  pipecut::LinearPipelineConfig cfg(random_matrix(4, j, rng),
                                    random_matrix(64, 6, rng), 1.0, 1.0);
  const auto sim = simulate(cfg, random_matrix(6, 4, rng),
                            pipecut::TrueVariances(1.0, 1.0), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        closed_form_posterior(sim.y, cfg, pipecut::PosteriorKind::Full));
  }
}
BENCHMARK(BM_ClosedFormFull)->Arg(32)->Arg(128)->Arg(512);

}  // namespace
