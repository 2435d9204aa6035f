#pragma once

#include <cstdint>
#include <random>

namespace lobforge {

/// Seeded random stream. Not thread-safe: concurrent consumers take their own
/// child() stream derived from a master seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent stream keyed by (seed, stream). Does not advance this stream.
  Rng child(std::uint64_t stream) const;

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Gamma with the given shape and scale (mean shape * scale).
  double gamma(double shape, double scale);
  std::int64_t poisson(double mean);
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace lobforge
