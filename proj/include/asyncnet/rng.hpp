#ifndef ASYNCNET_RNG_HPP
#define ASYNCNET_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace asyncnet {

// Counter-based pseudo-random stream (splitmix64): a Weyl counter pushed
// through an avalanche mix. Streams are cheap value types; copying a stream
// copies its position, which run-twice estimators use to replay a sequence.
// Independent streams are derived by hashing (seed, stream id) into a new
// starting point, so trials can be laid out across threads in any order
// without changing the draws each trial sees.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(mix(seed + kGamma)) {}

  static RandomStream derive(std::uint64_t base_seed, std::uint64_t stream_id) {
    return RandomStream(mix(base_seed + kGamma * (stream_id + 1)));
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform on [0, 1) with 53 significant bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller pair of independent N(0,1) draws.
  std::pair<double, double> gaussian_pair() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

  double gaussian() { return gaussian_pair().first; }

  // Circular complex Gaussian with E|g|^2 = 1.
  std::complex<double> complex_gaussian() {
    const auto [a, b] = gaussian_pair();
    return {a * std::numbers::sqrt2 / 2.0, b * std::numbers::sqrt2 / 2.0};
  }

  // Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 boosted through
  // Gamma(shape + 1) * U^{1/shape}.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be > 0");
    if (shape < 1.0) {
      const double u = 1.0 - uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = gaussian();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = 1.0 - uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Beta(xi, zeta) as a ratio of two Gamma draws.
  double beta(double xi, double zeta) {
    const double g1 = gamma(xi);
    const double g2 = gamma(zeta);
    return g1 / (g1 + g2);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace asyncnet

#endif  // ASYNCNET_RNG_HPP
