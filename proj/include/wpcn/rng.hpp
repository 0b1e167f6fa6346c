#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace wpcn {

// 64-bit mix used to derive independent sub-streams from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Sub-seed for (axis value index, realization index); independent of
// execution order so parallel sweeps stay byte-reproducible.
inline std::uint64_t derive_subseed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b) {
  return splitmix64(splitmix64(master ^ (a + 1) * 0x9e3779b97f4a7c15ULL) ^
                    (b + 1) * 0xd1b54a32d192ed03ULL);
}

// Deterministic draws on top of mt19937_64. The transforms are spelled out
// here instead of using std::*_distribution so that output streams do not
// depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // (0, 1), safe as a log argument
  double uniform_open() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // standard normal via Box-Muller, one spare cached
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // unit-mean exponential, strictly positive
  double exp_unit_mean() { return -std::log(uniform_open()); }

  // uniform integer in [0, n), rejection sampled
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace wpcn
