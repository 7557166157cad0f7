#include <benchmark/benchmark.h>

#include "pipecut/polya_gamma.hpp"
#include "pipecut/rng.hpp"

namespace {

void BM_PolyaGammaDraw(benchmark::State& state) {
  pipecut::Rng rng(3);
  const double c = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pipecut::sample_pg1(c, rng));
  }
}
BENCHMARK(BM_PolyaGammaDraw)->Arg(0)->Arg(2)->Arg(10);

}  // namespace
