#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace shiftlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Stream ids for deriving independent per-run generators from one master
// seed. Disabling one consumer must not shift the draws of the others.
enum class RngStream : std::uint64_t {
  Env = 1,
  AgentInit = 2,
  ActionNoise = 3,
  ActiveIndex = 4,
  Data = 5,
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  static Rng for_stream(std::uint64_t master_seed, RngStream stream) {
    return Rng(splitmix64(master_seed) ^
               splitmix64(static_cast<std::uint64_t>(stream) * 0x9E3779B97F4A7C15ull));
  }

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // unbiased draw from [0, n)
  int uniform_int(int n) {
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t reject_below = (0ull - un) % un;  // 2^64 mod n
    std::uint64_t x = next_u64();
    while (x < reject_below) x = next_u64();
    return static_cast<int>(x % un);
  }

  // standard normal, Marsaglia polar method
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace shiftlab
