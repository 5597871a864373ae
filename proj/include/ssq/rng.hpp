#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ssq {

// Deterministic draw stream built on std::mt19937_64, which has a fully
// specified state transition, so equal seeds reproduce equal streams on any
// platform. Distribution recipes are fixed here instead of relying on
// std::*_distribution (whose output is implementation defined):
//   uniform:     (next_u64() >> 11) * 2^-53, in [0, 1)
//   normal:      Box-Muller on (1 - u1, u2), cosine variate returned first,
//                sine variate cached for the next call
//   exponential: inverse CDF, -scale * log1p(-u)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Mean `scale`.
  double exponential(double scale) { return -scale * std::log1p(-uniform()); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ssq
