// Reproducible random streams. Each trajectory owns a stream whose seed is a
// SplitMix64 mix of (master seed, trajectory index), so results do not depend
// on how trajectories are scheduled across workers.
#pragma once

#include <robpred/core/types.hpp>

#include <cstdint>
#include <random>

namespace robpred {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  static RandomStream for_trajectory(std::uint64_t master, std::uint64_t index) {
    return RandomStream(derive_stream_seed(master, index));
  }

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

  double normal() { return normal_(engine_); }

  /// Uniform on the open interval (0, 1).
  double uniform_open() {
    for (;;) {
      const double u = std::generate_canonical<double, 53>(engine_);
      if (u > 0.0 && u < 1.0) return u;
    }
  }

  double chi_squared(double dof) {
    std::chi_squared_distribution<double> dist(dof);
    return dist(engine_);
  }

  Vector normal_vector(Index d) {
    Vector z(d);
    for (Index i = 0; i < d; ++i) z(i) = normal();
    return z;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace robpred
