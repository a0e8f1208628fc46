#pragma once

// Deterministic random streams. Everything here is pinned to exact bit
// sequences across platforms: mt19937_64 is standard-defined, and the
// uniform/gaussian transforms are hand-rolled because the std::*_distribution
// classes are implementation-defined.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace qhwy {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// A named substream of a master seed. Distinct purposes give statistically
// independent engines; the mapping is stable, so any (seed, purpose) pair
// always yields the same sequence.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view purpose) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the purpose tag
    for (unsigned char c : purpose) {
      h ^= c;
      h *= 1099511628211ull;
    }
    std::uint64_t s = seed ^ h;
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    eng_.seed(a ^ (b << 1));
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (basic form, no rejection).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double gaussian(double stddev) { return stddev * gaussian(); }

  std::uint64_t next_u64() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qhwy
