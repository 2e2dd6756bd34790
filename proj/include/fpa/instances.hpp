#pragma once

// Auction instances: bidder value distributions plus the tie-breaking rule.
// Two canonical families are built here. In both, bidder 0 ("high") has a
// two-point value distribution {0, 1}, and the remaining bidders ("low")
// share one continuous value law. In the independent family the n low values
// are i.i.d.; in the correlated family the two low bidders hold one common
// draw.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fpa/common.hpp"
#include "fpa/dist.hpp"

namespace fpa {

enum class Family {
  kIndependentProduct,
  kCorrelatedPair,
};

enum class TieKind {
  kFavorBidderAtZero,  // all-zero profiles go to `favored`; otherwise lowest index
  kLowestIndex,
  kUniformRandom,
  kPriorityOrder,  // first bidder in `priority` among the top bids wins
};

struct TieBreakRule {
  TieKind kind = TieKind::kLowestIndex;
  int favored = 0;
  std::vector<int> priority;
};

// Winner among the highest bidders. u drives kUniformRandom; other kinds
// ignore it.
inline int tie_break(const TieBreakRule& rule, const std::vector<double>& bids,
                     double u = 0.0) {
  if (bids.empty()) throw std::invalid_argument("tie_break: no bids");
  double top = bids[0];
  for (double b : bids) top = std::max(top, b);
  std::vector<int> winners;
  for (int i = 0; i < static_cast<int>(bids.size()); ++i) {
    if (bids[i] == top) winners.push_back(i);
  }
  switch (rule.kind) {
    case TieKind::kFavorBidderAtZero:
      if (top == 0.0) return rule.favored;
      return winners.front();
    case TieKind::kLowestIndex:
      return winners.front();
    case TieKind::kUniformRandom: {
      const std::size_t k = std::min(
          static_cast<std::size_t>(u * static_cast<double>(winners.size())),
          winners.size() - 1);
      return winners[k];
    }
    case TieKind::kPriorityOrder:
      for (int p : rule.priority) {
        for (int w : winners) {
          if (w == p) return w;
        }
      }
      return winners.front();
  }
  throw std::logic_error("tie_break: unknown rule kind");
}

struct Instance {
  Family family = Family::kIndependentProduct;
  double eps = 0.0;
  int n_low = 0;       // number of low bidders
  int high_index = 0;  // bidder holding the two-point value distribution
  bool shared_low = false;  // correlated family: low bidders share one draw
  std::vector<Dist1D> marginals;
  TieBreakRule tie_rule;
  // One bidder per symmetry class; equilibrium checks verify these and
  // report the rest by symmetry.
  std::vector<int> rep_bidders;

  int bidders() const { return static_cast<int>(marginals.size()); }
};

// Low-bidder value law of the independent family with n low bidders:
// an atom at 0 of mass (4/e^2)^(1/n) and a continuous piece parameterized
// by t in [1, 2] with cdf (4 e^(2t-4) / t^2)^(1/n).
inline Dist1D independent_low_value(int n) {
  if (n < 2) throw std::invalid_argument("independent_low_value: n must be >= 2");
  MonotoneCurve c;
  c.kind = CurveKind::kValueLowIndependent;
  c.t_lo = 1.0;
  c.t_hi = 2.0;
  c.p0 = static_cast<double>(n);
  const double atom0 = std::pow(4.0 * inv_e2(), 1.0 / n);
  return with_curve({{0.0, atom0}}, c);
}

// Shared low value law of the correlated family: an atom at 0 of mass
// (eps + 1/e) / (eps + 1) and cdf (eps + 1/e) / (eps + 1 - v) up to 1 - 1/e.
inline Dist1D correlated_low_value(double eps) {
  if (!(eps >= 0.0) || !(eps < 1.0)) {
    throw std::invalid_argument("correlated_low_value: eps must be in [0, 1)");
  }
  MonotoneCurve c;
  c.kind = CurveKind::kValueLowCorrelated;
  c.t_lo = 0.0;
  c.t_hi = 1.0 - std::exp(-1.0);
  c.p0 = eps;
  const double atom0 = (eps + std::exp(-1.0)) / (eps + 1.0);
  return with_curve({{0.0, atom0}}, c);
}

// Independent family: one high bidder and n = ceil(1/eps) low bidders
// (n_override > 0 decouples n from eps). Ties at the all-zero profile favor
// the high bidder.
inline Instance build_independent_instance(double eps, int n_override = 0) {
  if (!(eps > 0.0) || !(eps < 0.125)) {
    throw std::invalid_argument("independent instance: eps must be in (0, 1/8)");
  }
  const int n = n_override > 0 ? n_override : static_cast<int>(std::ceil(1.0 / eps));
  if (n < 2) throw std::invalid_argument("independent instance: need at least 2 low bidders");
  Instance inst;
  inst.family = Family::kIndependentProduct;
  inst.eps = eps;
  inst.n_low = n;
  inst.high_index = 0;
  inst.shared_low = false;
  inst.marginals.reserve(static_cast<std::size_t>(n) + 1);
  inst.marginals.push_back(two_point(0.0, eps, 1.0));
  const Dist1D low = independent_low_value(n);
  for (int i = 0; i < n; ++i) inst.marginals.push_back(low);
  inst.tie_rule = {TieKind::kFavorBidderAtZero, 0, {}};
  inst.rep_bidders = {0, 1};
  return inst;
}

// Correlated family: one high bidder and two low bidders holding a single
// common value draw.
inline Instance build_correlated_instance(double eps) {
  if (!(eps > 0.0) || !(eps < 1.0)) {
    throw std::invalid_argument("correlated instance: eps must be in (0, 1)");
  }
  Instance inst;
  inst.family = Family::kCorrelatedPair;
  inst.eps = eps;
  inst.n_low = 2;
  inst.high_index = 0;
  inst.shared_low = true;
  const Dist1D low = correlated_low_value(eps);
  inst.marginals = {two_point(0.0, eps, 1.0), low, low};
  inst.tie_rule = {TieKind::kFavorBidderAtZero, 0, {}};
  inst.rep_bidders = {0, 1};
  return inst;
}

// Ad-hoc product instance for tests and demos; every bidder is its own
// symmetry class.
inline Instance product_instance(std::vector<Dist1D> marginals,
                                 TieBreakRule rule = {}) {
  if (marginals.size() < 2) {
    throw std::invalid_argument("product_instance: need at least 2 bidders");
  }
  Instance inst;
  inst.family = Family::kIndependentProduct;
  inst.n_low = 0;
  inst.high_index = -1;
  inst.shared_low = false;
  inst.marginals = std::move(marginals);
  inst.tie_rule = rule;
  inst.rep_bidders.resize(inst.marginals.size());
  for (int i = 0; i < inst.bidders(); ++i) inst.rep_bidders[i] = i;
  return inst;
}

// One joint value draw. Independent: one uniform per bidder, in index order.
// Correlated: one uniform for the high bidder, one for the shared low value.
inline std::vector<double> sample_values(const Instance& inst, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(inst.bidders()));
  if (inst.shared_low) {
    const double vh = sample(inst.marginals[inst.high_index], rng.uniform());
    double vl = 0.0;
    bool low_drawn = false;
    for (int i = 0; i < inst.bidders(); ++i) {
      if (i == inst.high_index) {
        v[i] = vh;
      } else {
        if (!low_drawn) {
          vl = sample(inst.marginals[i], rng.uniform());
          low_drawn = true;
        }
        v[i] = vl;
      }
    }
  } else {
    for (int i = 0; i < inst.bidders(); ++i) {
      v[i] = sample(inst.marginals[i], rng.uniform());
    }
  }
  return v;
}

}  // namespace fpa
