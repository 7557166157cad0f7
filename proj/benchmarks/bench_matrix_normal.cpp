#include <benchmark/benchmark.h>

#include "pipecut/matrix_normal.hpp"
#include "pipecut/rng.hpp"

namespace {

using pipecut::Matrix;
using pipecut::MatrixNormal;
using pipecut::Rng;

MatrixNormal make_dist(Eigen::Index n, Eigen::Index p, Rng& rng) {
  Matrix a(n, n), b(p, p), m(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) b(i, j) = rng.normal();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = rng.normal();
  return MatrixNormal(m, a * a.transpose() + Matrix::Identity(n, n),
                      b * b.transpose() + Matrix::Identity(p, p));
}

void BM_MatrixNormalLogDensity(benchmark::State& state) {
  Rng rng(1);
  const auto d = make_dist(state.range(0), state.range(0), rng);
  const Matrix x = d.sample(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(d.log_density(x));
  }
}
BENCHMARK(BM_MatrixNormalLogDensity)->Arg(4)->Arg(16)->Arg(64);

void BM_MatrixNormalSample(benchmark::State& state) {
  Rng rng(2);
  const auto d = make_dist(state.range(0), state.range(0), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(d.sample(rng));
  }
}
BENCHMARK(BM_MatrixNormalSample)->Arg(4)->Arg(16)->Arg(64);

}  // namespace
