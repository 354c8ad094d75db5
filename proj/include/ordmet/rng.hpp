#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace ordmet {

// splitmix64 finalizer. Full avalanche on 64 bits; used as the mixing core
// for the counter-based generator and for key derivation.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// FNV-1a over bytes; stable across platforms, used to key streams by string ids.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

// Counter-based pseudo-random generator. The output sequence is
// splitmix64 seeded with `key`; independent streams are derived with
// child(), never by splitting an output sequence between consumers.
// Results are therefore independent of scheduling and worker count as
// long as every task derives its own child from stable identifiers.
class KeyedRng {
 public:
  explicit KeyedRng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept {
    counter_ += 0x9E3779B97F4A7C15ull;
    return mix64(key_ + counter_);
  }

  // Derived stream. Children with distinct tags are decorrelated from each
  // other and from this stream's own outputs.
  KeyedRng child(std::uint64_t tag) const noexcept {
    return KeyedRng(mix64(key_ ^ 0x94D049BB133111EBull ^ mix64(tag)));
  }
  KeyedRng child(std::uint64_t a, std::uint64_t b) const noexcept {
    return child(a).child(b);
  }
  KeyedRng child(std::uint64_t a, std::uint64_t b, std::uint64_t c) const noexcept {
    return child(a).child(b).child(c);
  }
  KeyedRng child(std::string_view tag) const noexcept { return child(fnv1a64(tag)); }
  KeyedRng child(std::string_view tag, std::uint64_t a) const noexcept {
    return child(fnv1a64(tag)).child(a);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1), both endpoints excluded; safe input for quantile functions.
  double uniform_open01() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Rejection sampling keeps it exactly uniform.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    const std::uint64_t zone = UINT64_MAX - UINT64_MAX % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r < zone) return r % n;
    }
  }

  double normal();  // standard normal via inverse cdf
  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Rejection-sampled truncated normal on [lo, hi].
  double truncated_normal(double mean, double sd, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("truncated_normal: empty interval");
    for (;;) {
      const double x = normal(mean, sd);
      if (x >= lo && x <= hi) return x;
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Quantile function of the standard normal (Wichura's AS 241, double precision).
// Uses only +,*,/ and log/sqrt so results are reproducible for a given libm.
inline double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("inverse_normal_cdf: p must be in (0, 1)");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    x = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    x = num / den;
  }
  return q < 0.0 ? -x : x;
}

inline double KeyedRng::normal() { return inverse_normal_cdf(uniform_open01()); }

}  // namespace ordmet
