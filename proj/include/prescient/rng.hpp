// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace prescient {

// Deterministic, platform-independent random source (xoshiro256++ core with
// splitmix64 seeding). std::<distribution> output is implementation-defined,
// which would break byte-identical reruns, so all sampling is done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
    has_cached_normal_ = false;
  }

  // Counter-based stream split: independent generator for (master, stream).
  static Rng stream(std::uint64_t master, std::uint64_t stream_id) {
    std::uint64_t x = master;
    std::uint64_t a = splitmix64(x);
    x ^= 0x9E3779B97F4A7C15ull * (stream_id + 1);
    std::uint64_t b = splitmix64(x);
    return Rng(a ^ (b + 0x632BE59BD9B4E019ull + (stream_id << 1)));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  std::uint32_t uniform_int(std::uint32_t n) {
    // Lemire rejection-free-ish bounded draw; bias < 2^-32 is irrelevant here,
    // but keep the rejection loop for exactness.
    while (true) {
      std::uint64_t x = next_u64() & 0xFFFFFFFFull;
      std::uint64_t m = x * n;
      std::uint64_t l = m & 0xFFFFFFFFull;
      if (l >= n) return static_cast<std::uint32_t>(m >> 32);
      std::uint64_t floor = (0x100000000ull - n) % n;
      if (l >= floor) return static_cast<std::uint32_t>(m >> 32);
    }
  }

  // Standard normal via Box-Muller (pair cached).
  double normal() {
    if (has_cached_normal_) {
      has_cached_normal_ = false;
      return cached_normal_;
    }
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double c = std::cos(6.283185307179586476925286766559 * u2);
    double s = std::sin(6.283185307179586476925286766559 * u2);
    cached_normal_ = r * s;
    has_cached_normal_ = true;
    return r * c;
  }

  // CN(0, var): circularly symmetric, total variance var (var/2 per part).
  std::complex<double> cnormal(double var) {
    double sd = std::sqrt(var * 0.5);
    return {sd * normal(), sd * normal()};
  }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a + 0x9E3779B97F4A7C15ull * (b + 1);
    std::uint64_t r = splitmix64(x);
    return r ^ splitmix64(x);
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace prescient
