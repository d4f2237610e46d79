#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace uavsched {

// Seeded random stream with a draw counter. Every variate is built from raw
// 64-bit engine outputs so sequences are identical across standard libraries,
// and position() lets a snapshot record exactly how far the stream advanced.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  // Restores a stream at a recorded position.
  static Rng at_position(std::uint64_t seed, std::uint64_t position) {
    Rng rng(seed);
    rng.engine_.discard(position);
    rng.position_ = position;
    return rng;
  }

  // Derives an independent child stream; used to give each subsystem of a run
  // (layout, environment, exploration, replay, initialization) its own stream.
  Rng derive(std::uint64_t stream) const { return Rng(mix(seed_ ^ mix(stream + 0x9e3779b97f4a7c15ULL))); }

  std::uint64_t next_u64() {
    ++position_;
    return engine_();
  }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double exponential() { return -std::log1p(-uniform()); }

  // Unit-mean Gamma(m, 1/m) for integer m, as a scaled sum of m exponentials.
  double unit_gamma(int m) {
    double sum = 0.0;
    for (int k = 0; k < m; ++k) sum += exponential();
    return sum / static_cast<double>(m);
  }

  // Standard normal via Box-Muller; always consumes two draws.
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n) by rejection, unbiased.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return position_; }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uint64_t position_ = 0;
};

}  // namespace uavsched
