#pragma once
// Deterministic randomness utilities.
//
// Two usage patterns:
//  * Stream: a sequential generator for draws whose order is fixed within a
//    run (actor sampling, weight init, minibatch selection).
//  * keyed_* free functions: counter-style draws addressed by integer keys
//    (slot, device, level). Re-querying the same key yields the same value,
//    so environment realizations are independent of the order or number of
//    queries a policy makes.
//
// Everything here is platform independent: no std::*_distribution, whose
// output is implementation defined.

#include <cmath>
#include <cstdint>
#include <string_view>

namespace lab::rng {

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Independent substream seed for a named module stream.
inline std::uint64_t stream_seed(std::uint64_t master, std::string_view label) {
  return mix64(master + kGamma * hash_label(label));
}

inline double bits_to_u01(std::uint64_t bits) {      // [0, 1)
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// --- keyed (counter-based) draws ------------------------------------------

inline std::uint64_t keyed_bits(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed + kGamma * (a + 1));
  h = mix64(h + kGamma * (b + 1));
  h = mix64(h + kGamma * (c + 1));
  return h;
}

inline double keyed_u01(std::uint64_t seed, std::uint64_t a,
                        std::uint64_t b = 0, std::uint64_t c = 0) {
  return bits_to_u01(keyed_bits(seed, a, b, c));
}

// Exp(1) via inverse CDF; -log of a value in (0, 1].
inline double keyed_exp1(std::uint64_t seed, std::uint64_t a,
                         std::uint64_t b = 0, std::uint64_t c = 0) {
  return -std::log(1.0 - keyed_u01(seed, a, b, c));
}

// Inverse of the standard normal CDF, Acklam's rational approximation
// (|rel err| < 1.2e-9); plenty for synthetic noise injection.
inline double normal_icdf(double p) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  if (p <= 0.0) return -HUGE_VAL;
  if (p >= 1.0) return HUGE_VAL;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

inline double keyed_normal(std::uint64_t seed, std::uint64_t a,
                           std::uint64_t b = 0, std::uint64_t c = 0) {
  double u = bits_to_u01(keyed_bits(seed, a, b, c));
  // keep strictly inside (0,1)
  u = 0.5 + (u - 0.5) * (1.0 - 1e-12);
  return normal_icdf(u);
}

// --- sequential stream ------------------------------------------------------

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_bits() {
    state_ += kGamma;
    return mix64(state_);
  }

  double u01() { return bits_to_u01(next_bits()); }       // [0, 1)
  double open01() {                                        // (0, 1)
    double u;
    do { u = u01(); } while (u == 0.0);
    return u;
  }

  double normal() {  // Marsaglia polar method, spare cached
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * u01() - 1.0;
      v = 2.0 * u01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  double exp1() { return -std::log(open01()); }

  // uniform integer in [0, n), rejection-free enough for small n
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style multiply-shift; bias < 2^-64 * n, negligible here.
    unsigned __int128 m = static_cast<unsigned __int128>(next_bits()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace lab::rng
