#pragma once

// Shared numeric utilities: root finding, adaptive quadrature, a seeded RNG
// with a fixed uniform mapping, and the welfare ratio bounds the library
// reproduces.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>

namespace fpa {

// Asymptotic price-of-stability bounds for the two instance families.
inline constexpr double kPosIndependentBound = 0.864664716763387;  // 1 - 1/e^2
inline constexpr double kPosCorrelatedBound = 0.632120558828558;   // 1 - 1/e

inline double inv_e2() { return std::exp(-2.0); }

// Top of the focal low-bidder bid support, 1 - 4/e^2. Independent of the
// number of bidders.
inline double lambda_star() { return 1.0 - 4.0 * inv_e2(); }

// Root of f on [lo, hi]; requires a sign change (or an exact zero at an
// endpoint). Plain bisection: ~50 halvings regardless of f's shape, which is
// cheap enough for every caller in this library and immune to the flat
// derivatives some of our curves have at their endpoints.
template <class F>
double bisect(F&& f, double lo, double hi, double tol = 1e-13) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  double fhi = f(hi);
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw std::runtime_error("bisect: no sign change over bracket");
  }
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return 0.5 * (lo + hi);
}

namespace detail {

inline double simpson_once(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_once(a, m, fa, flm, fm);
  const double right = simpson_once(m, b, fm, frm, fb);
  const double err = left + right - whole;
  if (depth <= 0 || std::abs(err) < 15.0 * tol) {
    return left + right + err / 15.0;
  }
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b].
template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-12) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = detail::simpson_once(a, b, fa, fm, fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Deterministic RNG. The 53-bit mapping is written out so that the uniform
// stream is a function of the seed alone, not of the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform draw in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  std::uint64_t raw() { return eng_(); }

  // Independent substream: seed and stream id mixed through a SplitMix step.
  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return Rng(z ^ (z >> 31));
  }

 private:
  std::mt19937_64 eng_;
};

// Streaming mean and standard error (Welford).
struct MeanAccumulator {
  long long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }

  double std_error() const {
    return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }
};

}  // namespace fpa
