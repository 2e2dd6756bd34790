#pragma once

// One-dimensional value and bid distributions: a sorted list of point atoms
// plus at most one strictly increasing continuous piece given in parametric
// form (parameter t, coordinates point_at(t) and cdf_at(t)).
//
// Conventions, relied on everywhere:
//   * cdf is right-continuous and cdf(support_hi) == 1;
//   * quantile(q) = min{ x : cdf(x) >= q } (generalized inverse);
//   * the curve contributes mass cdf_at(t) - cdf_at(t_lo) over [t_lo, t], so
//     an atom may sit exactly at the curve's left endpoint without double
//     counting: the atom carries cdf_at(t_lo) and the curve the rest.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpa/common.hpp"

namespace fpa {

struct Atom {
  double point = 0.0;
  double mass = 0.0;
};

// Named parametric curves. p0 carries the family parameter: the number of
// low bidders n for the independent-family curves, the high-value failure
// probability eps for the mixture and correlated curves, and the cdf level
// at t_lo for the uniform segment (p1 the level at t_hi).
enum class CurveKind {
  kUniform,              // point t; cdf affine from p0 to p1
  kValueLowIndependent,  // t in [1,2]; low-bidder value curve, p0 = n
  kBidLowIndependent,    // t = bid in [0, 1-4/e^2]; low-bidder bid cdf, p0 = n
  kBidHighIndependent,   // t in [1,2]; high-bidder bid curve
  kBidHighMixture,       // t = mixture weight S; high bidder's mixed bid, p0 = eps
  kValueLowCorrelated,   // t = value in [0, 1-1/e]; shared low value, p0 = eps
  kTabulated,            // piecewise linear through (xs, cs); t in [0,1]
};

struct MonotoneCurve {
  CurveKind kind = CurveKind::kUniform;
  double t_lo = 0.0;
  double t_hi = 1.0;
  double p0 = 0.0;
  double p1 = 1.0;
  double shift = 0.0;  // additive offset in point space
  std::vector<double> xs;  // kTabulated: points, strictly increasing
  std::vector<double> cs;  // kTabulated: cdf levels, strictly increasing

  double point_at(double t) const;
  double cdf_at(double t) const;
  // d(cdf)/d(point) at parameter t; may be +inf where the point coordinate
  // has a stationary endpoint.
  double dcdf_dpoint(double t) const;
  double mass() const { return cdf_at(t_hi) - cdf_at(t_lo); }
};

namespace detail {

inline double lerp_nodes(const std::vector<double>& ys, double t) {
  const std::size_t m = ys.size();
  const double u = t * static_cast<double>(m - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(std::max(u, 0.0)), m - 2);
  const double frac = u - static_cast<double>(i);
  return ys[i] + frac * (ys[i + 1] - ys[i]);
}

inline double lerp_slope(const MonotoneCurve& c, double t) {
  const std::size_t m = c.xs.size();
  const double u = t * static_cast<double>(m - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(std::max(u, 0.0)), m - 2);
  const double dx = c.xs[i + 1] - c.xs[i];
  const double dc = c.cs[i + 1] - c.cs[i];
  return dx > 0.0 ? dc / dx : std::numeric_limits<double>::infinity();
}

}  // namespace detail

inline double MonotoneCurve::point_at(double t) const {
  switch (kind) {
    case CurveKind::kUniform:
    case CurveKind::kBidLowIndependent:
    case CurveKind::kValueLowCorrelated:
      return t + shift;
    case CurveKind::kValueLowIndependent: {
      const double n = p0;
      const double g = (n - (t - 1.0)) / (n * t - (t - 1.0));
      const double h = t * t * std::exp(2.0 - 2.0 * t);
      return 1.0 - g * h + shift;
    }
    case CurveKind::kBidHighIndependent:
      return 1.0 - t * t * std::exp(2.0 - 2.0 * t) + shift;
    case CurveKind::kBidHighMixture: {
      const double w = p0 + (1.0 - p0) * t;
      return 1.0 - 4.0 * w * std::exp(2.0 - 4.0 * std::sqrt(w)) + shift;
    }
    case CurveKind::kTabulated:
      return detail::lerp_nodes(xs, t) + shift;
  }
  throw std::logic_error("point_at: unknown curve kind");
}

inline double MonotoneCurve::cdf_at(double t) const {
  switch (kind) {
    case CurveKind::kUniform:
      return p0 + (t - t_lo) / (t_hi - t_lo) * (p1 - p0);
    case CurveKind::kValueLowIndependent: {
      const double n = p0;
      return std::pow(4.0 / (t * t) * std::exp(2.0 * t - 4.0), 1.0 / n);
    }
    case CurveKind::kBidLowIndependent: {
      const double n = p0;
      return std::pow(4.0 * inv_e2() / (1.0 - t), 1.0 / n);
    }
    case CurveKind::kBidHighIndependent:
      return t * t / 4.0;
    case CurveKind::kBidHighMixture:
      return t;
    case CurveKind::kValueLowCorrelated:
      return (p0 + std::exp(-1.0)) / (p0 + 1.0 - t);
    case CurveKind::kTabulated:
      return detail::lerp_nodes(cs, t);
  }
  throw std::logic_error("cdf_at: unknown curve kind");
}

inline double MonotoneCurve::dcdf_dpoint(double t) const {
  switch (kind) {
    case CurveKind::kUniform:
      return (p1 - p0) / (t_hi - t_lo);
    case CurveKind::kValueLowIndependent: {
      const double n = p0;
      const double c = cdf_at(t);
      const double dc_dt = c * (2.0 - 2.0 / t) / n;
      const double num = n - (t - 1.0);
      const double den = n * t - (t - 1.0);
      const double g = num / den;
      const double dg = (-den - num * (n - 1.0)) / (den * den);
      const double h = t * t * std::exp(2.0 - 2.0 * t);
      const double dh = (2.0 * t - 2.0 * t * t) * std::exp(2.0 - 2.0 * t);
      const double dv_dt = -(dg * h + g * dh);
      return dc_dt / dv_dt;
    }
    case CurveKind::kBidLowIndependent: {
      const double n = p0;
      return cdf_at(t) / (n * (1.0 - t));
    }
    case CurveKind::kBidHighIndependent: {
      const double db_dt = (2.0 * t * t - 2.0 * t) * std::exp(2.0 - 2.0 * t);
      return (t / 2.0) / db_dt;
    }
    case CurveKind::kBidHighMixture: {
      const double w = p0 + (1.0 - p0) * t;
      const double db_dw = 4.0 * std::exp(2.0 - 4.0 * std::sqrt(w)) * (2.0 * std::sqrt(w) - 1.0);
      return 1.0 / ((1.0 - p0) * db_dw);
    }
    case CurveKind::kValueLowCorrelated:
      return cdf_at(t) / (p0 + 1.0 - t);
    case CurveKind::kTabulated:
      return detail::lerp_slope(*this, t);
  }
  throw std::logic_error("dcdf_dpoint: unknown curve kind");
}

struct Dist1D {
  std::vector<Atom> atoms;  // sorted by point, strictly increasing points
  std::optional<MonotoneCurve> curve;
  double support_lo = 0.0;
  double support_hi = 0.0;
};

inline double total_mass(const Dist1D& d) {
  double acc = 0.0;
  for (const Atom& a : d.atoms) acc += a.mass;
  if (d.curve) acc += d.curve->mass();
  return acc;
}

// Structural checks shared by factories and deserialization.
inline void validate(const Dist1D& d) {
  for (std::size_t i = 0; i < d.atoms.size(); ++i) {
    if (!(d.atoms[i].mass > 0.0)) {
      throw std::invalid_argument("dist: atom mass must be positive");
    }
    if (i > 0 && !(d.atoms[i].point > d.atoms[i - 1].point)) {
      throw std::invalid_argument("dist: atom points must be strictly increasing");
    }
  }
  if (d.curve) {
    const MonotoneCurve& c = *d.curve;
    if (!(c.t_hi > c.t_lo)) throw std::invalid_argument("dist: empty curve range");
    if (c.kind == CurveKind::kTabulated) {
      if (c.xs.size() < 2 || c.xs.size() != c.cs.size()) {
        throw std::invalid_argument("dist: tabulated curve needs matching nodes");
      }
    }
    const int probes = 64;
    double prev_p = c.point_at(c.t_lo);
    double prev_c = c.cdf_at(c.t_lo);
    for (int k = 1; k <= probes; ++k) {
      const double t = c.t_lo + (c.t_hi - c.t_lo) * static_cast<double>(k) / probes;
      const double p = c.point_at(t);
      const double cc = c.cdf_at(t);
      if (!(p > prev_p) || !(cc > prev_c)) {
        throw std::invalid_argument("dist: curve must increase in point and cdf");
      }
      prev_p = p;
      prev_c = cc;
    }
  }
  const double m = total_mass(d);
  if (std::abs(m - 1.0) > 1e-12) {
    throw std::invalid_argument("dist: total mass " + std::to_string(m) + " != 1");
  }
}

// Sorts and merges atoms, recomputes the support, and validates.
inline Dist1D finalize(Dist1D d) {
  std::sort(d.atoms.begin(), d.atoms.end(),
            [](const Atom& a, const Atom& b) { return a.point < b.point; });
  std::vector<Atom> merged;
  for (const Atom& a : d.atoms) {
    if (a.mass <= 0.0) continue;
    if (!merged.empty() && merged.back().point == a.point) {
      merged.back().mass += a.mass;
    } else {
      merged.push_back(a);
    }
  }
  d.atoms = std::move(merged);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Atom& a : d.atoms) {
    lo = std::min(lo, a.point);
    hi = std::max(hi, a.point);
  }
  if (d.curve) {
    lo = std::min(lo, d.curve->point_at(d.curve->t_lo));
    hi = std::max(hi, d.curve->point_at(d.curve->t_hi));
  }
  d.support_lo = lo;
  d.support_hi = hi;
  validate(d);
  return d;
}

inline Dist1D point_mass(double x) {
  Dist1D d;
  d.atoms = {{x, 1.0}};
  return finalize(std::move(d));
}

inline Dist1D two_point(double x0, double m0, double x1) {
  Dist1D d;
  d.atoms = {{x0, m0}, {x1, 1.0 - m0}};
  return finalize(std::move(d));
}

inline Dist1D uniform_dist(double lo, double hi) {
  Dist1D d;
  MonotoneCurve c;
  c.kind = CurveKind::kUniform;
  c.t_lo = lo;
  c.t_hi = hi;
  c.p0 = 0.0;
  c.p1 = 1.0;
  d.curve = c;
  return finalize(std::move(d));
}

inline Dist1D with_curve(std::vector<Atom> atoms, MonotoneCurve c) {
  Dist1D d;
  d.atoms = std::move(atoms);
  d.curve = std::move(c);
  return finalize(std::move(d));
}

// Shifts every point coordinate by delta; masses unchanged.
inline Dist1D shifted(const Dist1D& d, double delta) {
  Dist1D out = d;
  for (Atom& a : out.atoms) a.point += delta;
  if (out.curve) out.curve->shift += delta;
  return finalize(std::move(out));
}

namespace detail {

// Parameter t with point_at(t) == x; requires x within the curve's point range.
inline double invert_point(const MonotoneCurve& c, double x) {
  return bisect([&](double t) { return c.point_at(t) - x; }, c.t_lo, c.t_hi,
                std::max(1e-14, 1e-13 * (c.t_hi - c.t_lo)));
}

// Parameter t with cdf_at(t) == c.cdf_at(t_lo) + level.
inline double invert_level(const MonotoneCurve& c, double level) {
  const double base = c.cdf_at(c.t_lo);
  const double cap = c.mass();
  const double want = std::min(level, cap);
  return bisect([&](double t) { return (c.cdf_at(t) - base) - want; }, c.t_lo, c.t_hi,
                std::max(1e-14, 1e-13 * (c.t_hi - c.t_lo)));
}

}  // namespace detail

inline double atom_mass_at(const Dist1D& d, double x) {
  for (const Atom& a : d.atoms) {
    if (a.point == x) return a.mass;
    if (a.point > x) break;
  }
  return 0.0;
}

inline double cdf(const Dist1D& d, double x) {
  double acc = 0.0;
  for (const Atom& a : d.atoms) {
    if (a.point <= x) acc += a.mass;
    else break;
  }
  if (d.curve) {
    const MonotoneCurve& c = *d.curve;
    const double lo = c.point_at(c.t_lo);
    const double hi = c.point_at(c.t_hi);
    if (x >= hi) {
      acc += c.mass();
    } else if (x > lo) {
      acc += c.cdf_at(detail::invert_point(c, x)) - c.cdf_at(c.t_lo);
    }
  }
  return acc;
}

// P[X < x]: the cdf minus any atom exactly at x.
inline double cdf_left(const Dist1D& d, double x) {
  return cdf(d, x) - atom_mass_at(d, x);
}

inline double quantile(const Dist1D& d, double q) {
  if (q <= 0.0) return d.support_lo;
  if (q > 1.0) q = 1.0;
  const MonotoneCurve* c = d.curve ? &*d.curve : nullptr;
  const double c_lo = c ? c->point_at(c->t_lo) : 0.0;
  const double c_hi = c ? c->point_at(c->t_hi) : 0.0;
  auto curve_below = [&](double x) {
    if (!c || x <= c_lo) return 0.0;
    if (x >= c_hi) return c->mass();
    return c->cdf_at(detail::invert_point(*c, x)) - c->cdf_at(c->t_lo);
  };
  double atoms_below = 0.0;
  for (const Atom& a : d.atoms) {
    const double cb = curve_below(a.point);
    if (q <= atoms_below + cb) {
      return c->point_at(detail::invert_level(*c, q - atoms_below));
    }
    if (q <= atoms_below + cb + a.mass) return a.point;
    atoms_below += a.mass;
  }
  if (c) return c->point_at(detail::invert_level(*c, q - atoms_below));
  return d.support_hi;
}

// Inverse-transform sampling; u uniform in [0, 1).
inline double sample(const Dist1D& d, double u) { return quantile(d, u); }

// Earth mover's distance of the given order on a fixed quantile grid
// (trapezoid rule; both endpoints included). order >= 1, or +inf for the
// worst-case quantile gap. The grid and weights are shared by every order,
// so the power-mean ordering emd(p) <= emd(p') for p <= p' holds exactly.
inline double emd(const Dist1D& a, const Dist1D& b, double order) {
  const bool inf_order = std::isinf(order);
  if (!inf_order && !(order >= 1.0)) {
    throw std::invalid_argument("emd: order must be >= 1 or infinity");
  }
  constexpr int kQ = 100000;
  double acc = 0.0;
  double worst = 0.0;
  for (int k = 0; k < kQ; ++k) {
    const double q = static_cast<double>(k) / (kQ - 1);
    const double diff = std::abs(quantile(a, q) - quantile(b, q));
    if (inf_order) {
      worst = std::max(worst, diff);
    } else {
      const double w = (k == 0 || k == kQ - 1) ? 0.5 : 1.0;
      acc += w * std::pow(diff, order);
    }
  }
  if (inf_order) return worst;
  return std::pow(acc / (kQ - 1), 1.0 / order);
}

}  // namespace fpa
