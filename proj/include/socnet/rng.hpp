#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "socnet/errors.hpp"

namespace socnet {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded generator with hand-rolled draws. std:: distributions are
// implementation defined, which would break pinned regression values,
// so everything downstream of the engine is spelled out here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  // Independent stream derived from a master seed and a stream index.
  static Rng derive(std::uint64_t master, std::uint64_t stream) {
    return Rng(splitmix64(master ^ splitmix64(stream + 0x51ed2701ULL)));
  }

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Requires n >= 1.
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925287 * u2);
  }

  // Index drawn proportionally to nonnegative weights.
  std::size_t categorical(const std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) total += x;
    if (total <= 0.0) throw AllZeroError("categorical: no positive weight");
    double r = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      acc += w[i];
      if (r < acc) return i;
    }
    return w.size() - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace socnet
