#ifndef FPPO_RNG_HPP_
#define FPPO_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace fppo {

/// Reproducible random source: std::mt19937_64 (bit-exact across standard
/// library implementations) with an explicit Box-Muller normal transform,
/// since std::normal_distribution is not portable across vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double two_pi = 6.28318530717958647692;
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(two_pi * u2);
    have_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fppo

#endif  // FPPO_RNG_HPP_
