#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace she {

// splitmix64 finalizer; replication streams are derived as
// mix(seed ^ mix(index)), so stream i depends only on (seed, i) and
// results are independent of how replications are scheduled on threads.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index));
}

// xoshiro256++ with splitmix64 state expansion.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t x = seed;
    for (auto& si : s_) {
      x = splitmix64(x);
      si = x;
    }
  }

  static Rng for_replication(std::uint64_t seed, std::uint64_t index) {
    return Rng(derive_stream_seed(seed, index));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform on (0,1); never returns exactly 0 or 1
  double uniform() {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return u == 0.0 ? 0x1.0p-53 : u;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

  // Box-Muller; one spare kept per stream
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // exact Poisson sample; chunked multiplication method, O(mean) time
  std::uint64_t poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 500.0) {
      total += poisson_small(500.0);
      mean -= 500.0;
    }
    return total + poisson_small(mean);
  }

  // uniform point in the unit ball of R^d (radius by inverse transform)
  std::vector<double> uniform_ball(int d) {
    std::vector<double> v(static_cast<std::size_t>(d));
    double norm2 = 0.0;
    for (auto& c : v) {
      c = normal();
      norm2 += c * c;
    }
    const double norm = std::sqrt(norm2);
    const double radius = std::pow(uniform(), 1.0 / d);
    for (auto& c : v) c *= radius / (norm > 0 ? norm : 1.0);
    return v;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    double prod = 1.0;
    std::uint64_t n = 0;
    for (;;) {
      prod *= uniform();
      if (prod <= limit) return n;
      ++n;
    }
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace she
