#pragma once

// Deterministic per-index random streams and the scalar variates the samplers
// need. The normal and gamma generators are implemented here rather than
// taken from <random> because the standard distributions are
// implementation-defined, and batches must be bit-identical everywhere.

#include <cmath>
#include <cstdint>
#include <limits>

namespace wishart_cone {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** seeded from (seed, stream, index) through splitmix64, so every
/// sample index owns an independent substream.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t sm = seed;
    std::uint64_t mixed = splitmix64(sm) ^ (stream * 0xd1b54a32d192ed03ULL);
    sm = mixed;
    mixed = splitmix64(sm) ^ (index * 0xabc98388fb8fac03ULL);
    sm = mixed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal, Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  /// Gamma(shape, scale), Marsaglia-Tsang. Shapes below one use the boost
  /// Gamma(a) = Gamma(a + 1) * U^{1/a}, evaluated in log space so tiny
  /// shapes underflow to exactly zero instead of producing NaN.
  double gamma(double shape, double scale = 1.0) {
    if (shape < 1.0) {
      const double g = standard_gamma_ge1(shape + 1.0);
      return scale * std::exp(std::log(g) + std::log(uniform()) / shape);
    }
    return scale * standard_gamma_ge1(shape);
  }

  /// Chi-square with real-valued degrees of freedom.
  double chi_square(double dof) { return gamma(0.5 * dof, 2.0); }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  double standard_gamma_ge1(double a) {
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace wishart_cone
