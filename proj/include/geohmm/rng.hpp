#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace geohmm {

/// Seeded random stream. Every sampler in the library draws from one of
/// these, so a fixed seed reproduces identical output on any platform: only
/// the raw 64-bit engine output is used, never the implementation-defined
/// std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  double normal();
  double normal(double mean, double variance);

  /// Index drawn proportionally to `weights` (need not be normalized).
  std::size_t categorical(std::span<const double> weights);

  /// Derives an independent stream for sub-task `index` (restart, sequence).
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace geohmm
