#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rsmt {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded random source. All project randomness flows through this type so a
// single --seed makes runs reproducible. Normals use Box-Muller rather than
// std::normal_distribution (whose output is implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    if (hi <= lo) return lo;
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Independent child stream identified by a tag; forking does not disturb
  // this generator's sequence.
  Rng fork(uint64_t tag) const { return Rng(splitmix64(seed_ ^ splitmix64(tag + 0x51ed2701)) ); }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rsmt
