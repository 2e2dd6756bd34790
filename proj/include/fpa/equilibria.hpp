#pragma once

// Equilibrium objects for the two instance families.
//
// Independent family (one high bidder, n i.i.d. low bidders):
//   * the high bidder bids 0 at value 0 and, at value 1, mixes an atom at 0
//     with the curve b(S) = 1 - 4w e^(2-4 sqrt(w)), w = eps + (1-eps) S;
//   * a low bidder with value v(t) bids beta(t) = 1 - t^2 e^(2-2t);
//   * induced bid laws: the high bid has an atom of exactly 1/4 at 0; the low
//     bid cdf is ((4/e^2) / (1-b))^(1/n) up to lambda = 1 - 4/e^2.
//
// Correlated family (one high bidder, two low bidders sharing a draw):
//   * the high bidder always bids 0, the low bidders bid their value.
//
// Also here: the inverse bid map (bid -> value rationalizing it), detection
// of a bidder who wins the boundary bid with positive probability while
// valuing the good above it, the regret-preserving shift that turns an exact
// equilibrium into a strict-tie approximate one, a coordinated strategy that
// always hands the good to a highest-value bidder, and a numeric ODE solver
// re-deriving the independent-family bid laws from their first-order
// conditions.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fpa/common.hpp"
#include "fpa/dist.hpp"
#include "fpa/instances.hpp"

namespace fpa {

struct BidderStrategy {
  // Bid distribution played at a given value.
  std::function<Dist1D(double)> dist_of_value;
};

// A profile of per-bidder (value -> bid distribution) maps together with the
// induced bid laws. gamma is the infimum and lambda the supremum of the
// support of the first-order statistic of bids.
struct IndependentStrategy {
  std::vector<BidderStrategy> bidders;
  std::vector<Dist1D> bid_dists;
  double gamma = 0.0;
  double lambda = 0.0;
};

// A coordinated map from joint values to joint bids.
struct JointStrategy {
  std::function<std::vector<double>(const std::vector<double>&)> bids_of_values;
  double delta = 0.0;
};

// Induced bid laws with the correlation structure needed to evaluate the
// competition each bidder faces.
struct BidSystem {
  std::vector<Dist1D> bid_dists;
  double gamma = 0.0;
  double lambda = 0.0;
  bool shared_low = false;  // the non-high bid coordinates are one draw
  int high_index = 0;

  int bidders() const { return static_cast<int>(bid_dists.size()); }

  // P[max of the others' bids <= b] for the given bidder.
  double competing_cdf(int bidder, double b) const {
    if (shared_low) {
      if (bidder == high_index) {
        const int low = bidder == 0 ? 1 : 0;
        return cdf(bid_dists[low], b);
      }
      const int other = other_low(bidder);
      return cdf(bid_dists[high_index], b) * cdf(bid_dists[other], b);
    }
    double acc = 1.0;
    for (int k = 0; k < bidders(); ++k) {
      if (k != bidder) acc *= cdf(bid_dists[k], b);
    }
    return acc;
  }

  // P[max of all bids <= b].
  double first_order_cdf(double b) const {
    if (shared_low) {
      const int low = high_index == 0 ? 1 : 0;
      return cdf(bid_dists[high_index], b) * cdf(bid_dists[low], b);
    }
    double acc = 1.0;
    for (int k = 0; k < bidders(); ++k) acc *= cdf(bid_dists[k], b);
    return acc;
  }

  // Sum over the others of d(ln B_k)/db at b; only continuous parts
  // contribute. Defined on the interior of the bid support.
  double competing_log_density(int bidder, double b) const {
    if (shared_low) {
      if (bidder == high_index) {
        const int low = bidder == 0 ? 1 : 0;
        return log_density(bid_dists[low], b);
      }
      return log_density(bid_dists[high_index], b) +
             log_density(bid_dists[other_low(bidder)], b);
    }
    double acc = 0.0;
    for (int k = 0; k < bidders(); ++k) {
      if (k != bidder) acc += log_density(bid_dists[k], b);
    }
    return acc;
  }

  static double log_density(const Dist1D& d, double b) {
    if (!d.curve) return 0.0;
    const MonotoneCurve& c = *d.curve;
    const double lo = c.point_at(c.t_lo);
    const double hi = c.point_at(c.t_hi);
    if (!(b > lo) || !(b <= hi)) return 0.0;
    const double t = detail::invert_point(c, b);
    double dens = c.dcdf_dpoint(t);
    if (!std::isfinite(dens)) {
      // Generic fallback: central finite difference on the cdf.
      const double h = 1e-6;
      dens = (cdf(d, b + h) - cdf(d, b - h)) / (2.0 * h);
    }
    const double level = cdf(d, b);
    return level > 0.0 ? dens / level : std::numeric_limits<double>::infinity();
  }

 private:
  int other_low(int bidder) const {
    for (int k = 0; k < bidders(); ++k) {
      if (k != bidder && k != high_index) return k;
    }
    throw std::logic_error("bid system: no second low bidder");
  }
};

struct FocalProfile {
  Instance instance;
  IndependentStrategy strategy;
  BidSystem system;
};

namespace detail {

// t in [1, 2] with low-bidder value v(t) == v.
inline double independent_t_of_value(double v, int n) {
  MonotoneCurve c;
  c.kind = CurveKind::kValueLowIndependent;
  c.t_lo = 1.0;
  c.t_hi = 2.0;
  c.p0 = static_cast<double>(n);
  if (v <= 0.0) return 1.0;
  if (v >= c.point_at(2.0)) return 2.0;
  return invert_point(c, v);
}

inline double independent_low_bid_of_t(double t) {
  return 1.0 - t * t * std::exp(2.0 - 2.0 * t);
}

}  // namespace detail

// Focal equilibrium of the independent family.
inline FocalProfile focal_independent(double eps, int n_override = 0) {
  Instance inst = build_independent_instance(eps, n_override);
  const int n = inst.n_low;

  MonotoneCurve high_curve;
  high_curve.kind = CurveKind::kBidHighIndependent;
  high_curve.t_lo = 1.0;
  high_curve.t_hi = 2.0;
  const Dist1D high_bid = with_curve({{0.0, 0.25}}, high_curve);

  MonotoneCurve low_curve;
  low_curve.kind = CurveKind::kBidLowIndependent;
  low_curve.t_lo = 0.0;
  low_curve.t_hi = lambda_star();
  low_curve.p0 = static_cast<double>(n);
  const Dist1D low_bid = with_curve({{0.0, std::pow(4.0 * inv_e2(), 1.0 / n)}}, low_curve);

  // The high bidder's mixture at value 1: atom at 0 of mass s_lo, then the
  // mixture curve over S in [s_lo, 1].
  const double s_lo = 1.0 - 0.75 / (1.0 - eps);
  MonotoneCurve mix;
  mix.kind = CurveKind::kBidHighMixture;
  mix.t_lo = s_lo;
  mix.t_hi = 1.0;
  mix.p0 = eps;
  const Dist1D high_mixture = with_curve({{0.0, s_lo}}, mix);

  IndependentStrategy strat;
  strat.bidders.resize(static_cast<std::size_t>(n) + 1);
  strat.bidders[0].dist_of_value = [high_mixture](double v) {
    return v < 0.5 ? point_mass(0.0) : high_mixture;
  };
  for (int i = 1; i <= n; ++i) {
    strat.bidders[i].dist_of_value = [n](double v) {
      if (v <= 0.0) return point_mass(0.0);
      const double t = detail::independent_t_of_value(v, n);
      return point_mass(detail::independent_low_bid_of_t(t));
    };
  }
  strat.bid_dists.reserve(static_cast<std::size_t>(n) + 1);
  strat.bid_dists.push_back(high_bid);
  for (int i = 0; i < n; ++i) strat.bid_dists.push_back(low_bid);
  strat.gamma = 0.0;
  strat.lambda = lambda_star();

  BidSystem sys;
  sys.bid_dists = strat.bid_dists;
  sys.gamma = strat.gamma;
  sys.lambda = strat.lambda;
  sys.shared_low = false;
  sys.high_index = 0;

  return {std::move(inst), std::move(strat), std::move(sys)};
}

// Focal equilibrium of the correlated family: the high bidder always bids 0,
// the low bidders bid their common value.
inline FocalProfile focal_correlated(double eps) {
  Instance inst = build_correlated_instance(eps);

  IndependentStrategy strat;
  strat.bidders.resize(3);
  strat.bidders[0].dist_of_value = [](double) { return point_mass(0.0); };
  for (int i = 1; i <= 2; ++i) {
    strat.bidders[i].dist_of_value = [](double v) { return point_mass(v); };
  }
  strat.bid_dists = {point_mass(0.0), inst.marginals[1], inst.marginals[2]};
  strat.gamma = 0.0;
  strat.lambda = 1.0 - std::exp(-1.0);

  BidSystem sys;
  sys.bid_dists = strat.bid_dists;
  sys.gamma = strat.gamma;
  sys.lambda = strat.lambda;
  sys.shared_low = true;
  sys.high_index = 0;

  return {std::move(inst), std::move(strat), std::move(sys)};
}

// Value that rationalizes bid b for the given bidder: the first-order
// condition of interim utility gives v = b + 1 / sum_k d(ln B_k)/db over the
// others. Defined for b strictly inside (gamma, lambda); throws when the
// competing distribution is locally flat there.
inline double bid_to_value(const BidSystem& sys, int bidder, double b) {
  if (!(b > sys.gamma) || !(b < sys.lambda)) {
    throw std::invalid_argument("bid_to_value: bid outside the open bid support");
  }
  const double ell = sys.competing_log_density(bidder, b);
  if (!(ell > 1e-12)) {
    throw std::runtime_error("bid_to_value: competing distribution is flat at this bid");
  }
  return b + 1.0 / ell;
}

// A bidder who bids exactly gamma with positive probability while holding a
// value above gamma. At most one such bidder can exist in equilibrium; two
// candidates mean the profile is inconsistent.
inline std::optional<int> detect_monopolist(const FocalProfile& fp,
                                            double mass_tol = 1e-9) {
  const double g = fp.system.gamma;
  std::optional<int> found;
  for (int i = 0; i < fp.instance.bidders(); ++i) {
    const Dist1D& values = fp.instance.marginals[i];
    const BidderStrategy& s = fp.strategy.bidders[i];
    double mass = 0.0;
    for (const Atom& a : values.atoms) {
      if (a.point > g + 1e-12) {
        mass += a.mass * atom_mass_at(s.dist_of_value(a.point), g);
      }
    }
    if (values.curve) {
      const MonotoneCurve& c = *values.curve;
      const double span = c.mass();
      const int kGrid = 256;
      for (int k = 0; k < kGrid; ++k) {
        const double level = (static_cast<double>(k) + 0.5) / kGrid * span;
        const double v = c.point_at(detail::invert_level(c, level));
        if (v > g + 1e-12) {
          mass += (span / kGrid) * atom_mass_at(s.dist_of_value(v), g);
        }
      }
    }
    if (mass > mass_tol) {
      if (found) {
        throw std::runtime_error(
            "detect_monopolist: two bidders hold the boundary bid with value above it");
      }
      found = i;
    }
  }
  return found;
}

namespace detail {

// Value class relative to the boundary bid gamma.
enum class ValueClass { kBelow, kBoundary, kAbove };

inline ValueClass classify_value(double v, double gamma) {
  if (v < gamma - 1e-12) return ValueClass::kBelow;
  if (v <= gamma + 1e-12) return ValueClass::kBoundary;
  return ValueClass::kAbove;
}

// Per-value bid map of the regret-preserving shift. Values are classified
// against the original gamma, bids against it as well; `pre` is the uniform
// up-shift applied first so that no transformed bid goes below zero.
inline Dist1D transform_bid_dist(const Dist1D& base, ValueClass vc, double gamma,
                                 double delta, double pre) {
  Dist1D out;
  for (const Atom& a : base.atoms) {
    double p;
    if (vc == ValueClass::kAbove) {
      p = a.point + pre;  // winning-range bids keep their relative position
    } else if (a.point >= gamma - 1e-12 && vc == ValueClass::kBoundary) {
      p = gamma + pre - delta / 2.0;  // the boundary pair lands strictly between
    } else {
      p = std::max(a.point + pre - delta, 0.0);  // losing bids drop out of reach
    }
    out.atoms.push_back({p, a.mass});
  }
  if (base.curve) {
    MonotoneCurve c = *base.curve;
    if (vc == ValueClass::kAbove) {
      if (c.point_at(c.t_lo) < gamma - 1e-9) {
        throw std::invalid_argument("transform: continuous bids below gamma at a high value");
      }
      c.shift += pre;
    } else {
      if (c.point_at(c.t_hi) > gamma + 1e-9) {
        throw std::invalid_argument("transform: continuous bids above gamma at a low value");
      }
      c.shift += pre - delta;
    }
    out.curve = c;
  }
  return finalize(std::move(out));
}

}  // namespace detail

// Regret-preserving shift of an exact equilibrium into a profile whose ties
// at the boundary bid are strict: values at the boundary move to
// gamma - delta/2 (after a uniform +delta pre-shift when gamma < delta, so
// no bid goes negative), values above keep their bids, and losing bids drop
// by delta. Per-value bid laws move by at most delta in the worst-case
// quantile gap, and the winner's identity is preserved draw by draw.
inline IndependentStrategy approx_transform(const FocalProfile& fp, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("approx_transform: delta must be positive");
  const double g = fp.system.gamma;
  const double pre = g < delta ? delta : 0.0;

  IndependentStrategy out;
  const int nb = fp.instance.bidders();
  out.bidders.resize(static_cast<std::size_t>(nb));
  out.bid_dists.resize(static_cast<std::size_t>(nb));

  for (int i = 0; i < nb; ++i) {
    const BidderStrategy base = fp.strategy.bidders[i];
    out.bidders[i].dist_of_value = [base, g, delta, pre](double v) {
      return detail::transform_bid_dist(base.dist_of_value(v),
                                        detail::classify_value(v, g), g, delta, pre);
    };

    // Induced bid law: split the atom at gamma into its boundary-value and
    // high-value shares; shift everything else by class.
    const Dist1D& bids = fp.system.bid_dists[i];
    const Dist1D& values = fp.instance.marginals[i];
    double boundary_share = 0.0;
    const double v_atom = atom_mass_at(values, g);
    if (v_atom > 0.0) {
      boundary_share = v_atom * atom_mass_at(fp.strategy.bidders[i].dist_of_value(g), g);
    }
    Dist1D nb_dist;
    for (const Atom& a : bids.atoms) {
      if (a.point < g - 1e-12) {
        nb_dist.atoms.push_back({std::max(a.point + pre - delta, 0.0), a.mass});
      } else if (a.point <= g + 1e-12) {
        if (boundary_share > 1e-15) {
          nb_dist.atoms.push_back({g + pre - delta / 2.0, boundary_share});
        }
        if (a.mass - boundary_share > 1e-15) {
          nb_dist.atoms.push_back({a.point + pre, a.mass - boundary_share});
        }
      } else {
        nb_dist.atoms.push_back({a.point + pre, a.mass});
      }
    }
    if (bids.curve) {
      MonotoneCurve c = *bids.curve;
      if (c.point_at(c.t_lo) < g - 1e-9) {
        throw std::invalid_argument("transform: continuous bid mass below gamma");
      }
      c.shift += pre;
      nb_dist.curve = c;
    }
    out.bid_dists[i] = finalize(std::move(nb_dist));
  }

  double gamma_new = -std::numeric_limits<double>::infinity();
  double lambda_new = -std::numeric_limits<double>::infinity();
  for (const Dist1D& d : out.bid_dists) {
    gamma_new = std::max(gamma_new, d.support_lo);
    lambda_new = std::max(lambda_new, d.support_hi);
  }
  out.gamma = gamma_new;
  out.lambda = lambda_new;
  return out;
}

namespace detail {

// Bid of the designated winner in the efficient coordinated strategy. The
// winner pays the best competing value; floored shading keeps every loser
// strictly below that whenever it is positive. When the best competing
// value is 0 the losers' floor would tie it, so a positive winner with
// opponents bids min(delta, value)/2 instead: still strictly winning, and
// cheap enough that undercutting to zero gains less than delta.
inline double winner_bid(double best_other, double v_h, double delta, bool has_others) {
  if (best_other > 0.0) return best_other;
  if (has_others && v_h > 0.0) return std::min(delta, v_h) / 2.0;
  return 0.0;
}

}  // namespace detail

// Coordinated strategy that always hands the good to a highest-value bidder:
// the lowest-index maximizer bids the best competing value (nudged above
// zero when that value is zero, see detail::winner_bid), everyone else
// shades their own value by delta (floored at zero). The winner is strict
// whenever the maximum value is positive, so realized welfare equals the
// maximum value under every tie-breaking rule.
inline JointStrategy efficient_joint_strategy(double delta) {
  if (!(delta > 0.0)) {
    throw std::invalid_argument("efficient_joint_strategy: delta must be positive");
  }
  JointStrategy js;
  js.delta = delta;
  js.bids_of_values = [delta](const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("joint strategy: empty value profile");
    std::size_t h = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] > v[h]) h = i;
    }
    double best_other = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i != h) best_other = std::max(best_other, v[i]);
    }
    std::vector<double> bids(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      bids[i] = (i == h) ? detail::winner_bid(best_other, v[h], delta, v.size() > 1)
                         : std::max(v[i] - delta, 0.0);
    }
    return bids;
  };
  return js;
}

// Numeric re-derivation of the independent-family bid laws from their
// first-order conditions, on a uniform grid:
//   (i)  d ln B_L / db = 1 / (n (1 - b)) from B_L(0) = (4/e^2)^(1/n),
//        integrated until B_L reaches 1; that crossing is the top of the
//        bid support;
//   (ii) d ln B_H / dt = 2 / t integrated down from B_H(t=2) = 1; the value
//        at t = 1 is the high bidder's atom at zero.
// Returns the tabulated system; grid_size is the number of RK4 nodes.
inline BidSystem solve_bid_ode(double eps, int grid_size, int n_override = 0) {
  if (grid_size < 16) throw std::invalid_argument("solve_bid_ode: grid too small");
  const Instance inst = build_independent_instance(eps, n_override);
  const int n = inst.n_low;

  // (i) Low bid law. The crossing sits below 0.6 for every n.
  const double cap = 0.6;
  const double h = cap / (grid_size - 1);
  auto f = [n](double b) { return 1.0 / (n * (1.0 - b)); };
  std::vector<double> bs(static_cast<std::size_t>(grid_size));
  std::vector<double> ys(static_cast<std::size_t>(grid_size));
  ys[0] = std::log(4.0 * inv_e2()) / n;
  bs[0] = 0.0;
  int cross = -1;
  for (int k = 0; k + 1 < grid_size; ++k) {
    const double b = k * h;
    const double k1 = f(b);
    const double k2 = f(b + 0.5 * h);
    const double k4 = f(b + h);
    bs[k + 1] = (k + 1) * h;
    ys[k + 1] = ys[k] + h / 6.0 * (k1 + 4.0 * k2 + k4);
    if (cross < 0 && ys[k + 1] >= 0.0) cross = k + 1;
  }
  if (cross < 0) throw std::runtime_error("solve_bid_ode: no crossing below the cap");

  // Refine the crossing by bisection, integrating the tail step exactly the
  // same way the grid was built.
  auto y_at = [&](double b_target) {
    const double b0 = bs[cross - 1];
    double y = ys[cross - 1];
    const int sub = 8;
    const double hh = (b_target - b0) / sub;
    for (int k = 0; k < sub; ++k) {
      const double b = b0 + k * hh;
      y += hh / 6.0 * (f(b) + 4.0 * f(b + 0.5 * hh) + f(b + hh));
    }
    return y;
  };
  const double lambda_num = bisect(y_at, bs[cross - 1], bs[cross], 1e-15);

  MonotoneCurve low_tab;
  low_tab.kind = CurveKind::kTabulated;
  for (int k = 0; k < cross; ++k) {
    low_tab.xs.push_back(bs[k]);
    low_tab.cs.push_back(std::exp(ys[k]));
  }
  low_tab.xs.push_back(lambda_num);
  low_tab.cs.push_back(1.0);
  const double low_atom = std::exp(ys[0]);
  const Dist1D low_bid = with_curve({{0.0, low_atom}}, low_tab);

  // (ii) High bid law, integrated in t from 2 down to 1.
  const double ht = 1.0 / (grid_size - 1);
  std::vector<double> ts(static_cast<std::size_t>(grid_size));
  std::vector<double> zs(static_cast<std::size_t>(grid_size));
  ts[0] = 2.0;
  zs[0] = 0.0;
  auto fz = [](double t) { return 2.0 / t; };
  for (int k = 0; k + 1 < grid_size; ++k) {
    const double t = 2.0 - k * ht;
    ts[k + 1] = 2.0 - (k + 1) * ht;
    zs[k + 1] = zs[k] - ht / 6.0 * (fz(t) + 4.0 * fz(t - 0.5 * ht) + fz(t - ht));
  }
  MonotoneCurve high_tab;
  high_tab.kind = CurveKind::kTabulated;
  for (int k = grid_size - 1; k >= 0; --k) {
    high_tab.xs.push_back(detail::independent_low_bid_of_t(ts[k]));
    high_tab.cs.push_back(std::exp(zs[k]));
  }
  const double high_atom = std::exp(zs[grid_size - 1]);
  const Dist1D high_bid = with_curve({{0.0, high_atom}}, high_tab);

  BidSystem sys;
  sys.bid_dists.reserve(static_cast<std::size_t>(n) + 1);
  sys.bid_dists.push_back(high_bid);
  for (int i = 0; i < n; ++i) sys.bid_dists.push_back(low_bid);
  sys.gamma = 0.0;
  sys.lambda = lambda_num;
  sys.shared_low = false;
  sys.high_index = 0;
  return sys;
}

}  // namespace fpa
