#pragma once

#include <cmath>
#include <cstdint>

namespace robreg {

/// Counter-based pseudo-random generator.
///
/// Every output is a pure function of (seed, stream, counter): a stream is a
/// cheap handle that can be created per sample index, so generation order and
/// worker count never change the values drawn. The word function is the
/// splitmix64 finalizer applied twice, which is plenty for Monte Carlo use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Derives an independent 64-bit seed for a sub-task (restart, repetition).
  std::uint64_t derive(std::uint64_t id) const {
    return mix(mix(seed_ ^ 0x6c62272e07bb0142ULL) + id);
  }

  class Stream;
  Stream stream(std::uint64_t id) const;

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
};

/// One substream: sequential draws, position identified by an incrementing
/// counter. Copyable; copies replay the same sequence from the copied point.
class Rng::Stream {
 public:
  Stream(std::uint64_t key, std::uint64_t stream_id)
      : key_(mix(key ^ mix(stream_id * 0xd2b74407b1ce6e93ULL + 0x9e3779b97f4a7c15ULL))),
        counter_(0) {}

  std::uint64_t next_u64() { return mix(key_ + counter_++ * 0x9e3779b97f4a7c15ULL); }

  /// Uniform on (0,1); never returns an exact endpoint.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound) {
    // Multiply-shift with rejection to kill modulo bias.
    for (;;) {
      std::uint64_t x = next_u64();
      __uint128_t m = static_cast<__uint128_t>(x) * bound;
      auto lo = static_cast<std::uint64_t>(m);
      if (lo >= bound || lo >= (0ULL - bound) % bound) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  /// Standard normal via Box-Muller (explicit formulas keep draws identical
  /// across platforms, unlike std::normal_distribution).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Student-t with integer dof ≥ 1, via a normal over an explicit chi-square.
  double student_t(int dof) {
    double z = normal();
    double chi2 = 0.0;
    for (int j = 0; j < dof; ++j) {
      double g = normal();
      chi2 += g * g;
    }
    return z / std::sqrt(chi2 / static_cast<double>(dof));
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline Rng::Stream Rng::stream(std::uint64_t id) const { return Stream(seed_, id); }

}  // namespace robreg
