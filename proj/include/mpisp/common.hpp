#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>

namespace mpisp {

/// Saturating time sentinel. All schedule arithmetic treats +inf as
/// "unreachable"; care is taken never to form inf - inf.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Absolute tolerance for time comparisons when selecting transit branches
/// (residual-vs-travel tests, window checks). Instance data is O(1e3), so
/// 1e-9 is far below one ULP-relevant scale while absorbing accumulated
/// rounding from repeated additions.
inline constexpr double kTimeEps = 1e-9;

/// Absolute tolerance for fitness component comparisons (P, D, F). Two
/// solutions whose components all agree within this tolerance count as the
/// same solution (e.g. for repetition counting).
inline constexpr double kFitnessEps = 1e-6;

/// Deterministic RNG. mt19937_64 with a canonical 53-bit uniform instead of
/// std::uniform_real_distribution, whose output is implementation-defined;
/// identical (seed, call sequence) must reproduce identical runs everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] (inclusive). Rejection-free modulo is fine
  /// for test-scale ranges; bias is < 2^-50 for ranges below 2^13.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

/// FNV-1a over arbitrary bytes; used for config hashes, table cache keys and
/// cheap solution fingerprints.
inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a_mix(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= v & 0xff;
    h *= 0x100000001b3ull;
    v >>= 8;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  static const char* d = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = d[h & 0xf];
    h >>= 4;
  }
  return s;
}

}  // namespace mpisp
