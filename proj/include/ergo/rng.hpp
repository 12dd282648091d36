#ifndef ERGO_RNG_HPP
#define ERGO_RNG_HPP

#include <cstdint>
#include <random>
#include <span>

namespace ergo {

// Deterministic random stream.  mt19937_64 output is fully specified by the
// standard, and the variate transforms below are hand-rolled because the
// std::*_distribution classes are implementation-defined; together this makes
// every randomized result in the toolkit byte-identical across platforms.
//
// Replica / trial r of a run with root seed s uses Stream(s, r), so replicas
// may be evaluated in any order or in parallel.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(mix(seed, 0)) {}
  RandomStream(std::uint64_t root_seed, std::uint64_t stream)
      : gen_(mix(root_seed, stream)) {}

  // Uniform in (0, 1]; never returns 0, so logs are safe.
  double uniform01() {
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform01()) / rate; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t v = static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

  // Index sampled from a probability row by CDF walk.
  int sample_row(std::span<const double> probs) {
    double r = uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (r <= acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  std::uint64_t raw() { return gen_(); }

  // splitmix64-based seed mix; decorrelates (seed, stream) pairs.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace ergo

#endif
