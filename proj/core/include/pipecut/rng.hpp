#ifndef PIPECUT_RNG_HPP
#define PIPECUT_RNG_HPP

#include <cstdint>
#include <random>

namespace pipecut {

// Random source with self-contained distribution code so that draws are
// bit-reproducible across standard libraries.  One instance per thread;
// parallel work derives independent streams with Rng::derive_seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe to take log of.
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n);

  double normal();
  double exponential() { return -std::log(uniform_pos()); }

  // Gamma(shape, rate = 1), shape > 0 (Marsaglia-Tsang).
  double gamma(double shape);
  double gamma(double shape, double rate) { return gamma(shape) / rate; }

  // Inverse gamma with shape a and scale b: density ~ x^{-a-1} exp(-b/x).
  double inv_gamma(double shape, double scale) {
    return scale / gamma(shape);
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Counter-based stream split: the (stream, substream) pair indexes an
  // independent generator for a fixed master seed.
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                   std::uint64_t substream = 0);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pipecut

#endif  // PIPECUT_RNG_HPP
