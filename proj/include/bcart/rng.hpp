#pragma once

#include <cstdint>
#include <random>

namespace bcart {

// Deterministic random source. mt19937_64 is fully specified by the
// standard and all distribution transforms below are implemented here, so
// streams are bit-identical across platforms and compiler versions
// (std::*_distribution would not be).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform on (0,1]; never returns 0 so log(u) is safe.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Uniform on {0, ..., n-1}, n >= 1, via rejection (unbiased).
  std::uint64_t uniform_int(std::uint64_t n);

  double normal();
  double exponential(double rate);
  double gamma(double shape, double rate);
  long poisson(double mean);
  bool bernoulli(double p) { return uniform() <= p; }

  // Derive an independent stream deterministically from (seed, indices).
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bcart
