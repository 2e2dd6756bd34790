#pragma once

// Headline-claim reproduction. Each claim re-derives one published number or
// guarantee from the library's public entry points, compares it against the
// pinned target and tolerance, and reports a manifest row. The claim set is
// the repository's acceptance gate: every id maps to one acceptance
// criterion, and `fpa reproduce --all` fails if any row fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fpa/json_io.hpp"

namespace fpa {

struct ClaimResult {
  std::string id;
  std::string statement;
  double target = 0.0;
  double tolerance = 0.0;
  double computed = 0.0;
  bool passed = false;
  double seconds = 0.0;
  std::string detail;
};

// seconds stays off the manifest: artifacts must be byte-identical across
// reruns, and wall time is not. Timing goes to the progress lines instead.
inline void to_json(nlohmann::json& j, const ClaimResult& r) {
  j = {{"id", r.id},
       {"statement", r.statement},
       {"target", round12(r.target)},
       {"tolerance", round12(r.tolerance)},
       {"computed", round12(r.computed)},
       {"passed", r.passed},
       {"detail", r.detail}};
}

inline nlohmann::json manifest_json(const std::vector<ClaimResult>& claims) {
  bool all = true;
  for (const ClaimResult& c : claims) all = all && c.passed;
  return {{"passed", all}, {"claims", claims}};
}

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Worst violation across a claim's checks; <= 0 passes. Each check
// contributes how far it exceeds its own allowance.
struct Margin {
  double worst = -std::numeric_limits<double>::infinity();

  void require(double violation) { worst = std::max(worst, violation); }
  void require_zero(bool ok) { require(ok ? -1.0 : 1.0); }
  bool passed() const { return worst <= 0.0; }
};

inline std::vector<TieBreakRule> adversarial_rules(int bidders) {
  std::vector<int> low_first;
  for (int i = 1; i < bidders; ++i) low_first.push_back(i);
  low_first.push_back(0);
  return {{TieKind::kLowestIndex, 0, {}},
          {TieKind::kUniformRandom, 0, {}},
          {TieKind::kPriorityOrder, 0, low_first}};
}

// Values at which per-value bid laws are compared: every value atom plus
// quantile midpoints of the continuous part.
inline std::vector<double> probe_value_grid(const Dist1D& values, int grid) {
  std::vector<double> out;
  for (const Atom& a : values.atoms) out.push_back(a.point);
  if (values.curve) {
    const MonotoneCurve& c = *values.curve;
    const double span = c.mass();
    for (int k = 0; k < grid; ++k) {
      const double level = span * (static_cast<double>(k) + 0.5) / grid;
      out.push_back(c.point_at(invert_level(c, level)));
    }
  }
  return out;
}

inline ClaimResult claim_pos_independent() {
  ClaimResult r;
  r.id = "pos-independent";
  r.statement =
      "closed-form independent-family efficiency ratio at eps = 0.001 lies in "
      "[0.864665, 0.865667] and the eps grid decreases toward the bound";
  r.target = 0.864665;
  r.tolerance = 0.001002;
  const Stopwatch clock;
  const std::vector<WelfareReport> rows =
      efficiency_table(WelfareFamily::kIndependent, {0.1, 0.05, 0.01, 0.001});
  r.seconds = clock.seconds();
  r.computed = rows.back().ratio;
  bool monotone = true;
  std::string ratios;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k > 0) monotone = monotone && rows[k].ratio < rows[k - 1].ratio;
    ratios += (k ? " " : "") + fmt12(rows[k].ratio);
  }
  r.passed = r.computed >= r.target && r.computed <= r.target + r.tolerance &&
             monotone && r.seconds < 10.0;
  r.detail = "ratios " + ratios + " decreasing toward " + fmt12(kPosIndependentBound);
  return r;
}

inline ClaimResult claim_pos_correlated() {
  ClaimResult r;
  r.id = "pos-correlated";
  r.statement =
      "closed-form correlated-family efficiency ratio at eps = 0.001 is within "
      "0.005 of the bound, with auction welfare below it at every eps";
  r.target = kPosCorrelatedBound;
  r.tolerance = 0.005;
  const Stopwatch clock;
  const std::vector<WelfareReport> rows =
      efficiency_table(WelfareFamily::kCorrelated, {0.5, 0.1, 0.01, 0.001});
  r.seconds = clock.seconds();
  r.computed = rows.back().ratio;
  bool ok = std::abs(r.computed - r.target) <= r.tolerance;
  std::string ratios;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    ok = ok && rows[k].fpa <= 1.0 - std::exp(-1.0);
    if (k > 0) ok = ok && rows[k].ratio < rows[k - 1].ratio;
    ratios += (k ? " " : "") + fmt12(rows[k].ratio);
  }
  r.passed = ok && r.seconds < 5.0;
  r.detail = "ratios " + ratios + "; auction welfare stays below " +
             fmt12(1.0 - std::exp(-1.0));
  return r;
}

inline ClaimResult claim_bne_independent() {
  ClaimResult r;
  r.id = "bne-independent";
  r.statement =
      "independent focal profiles at eps in {0.05, 0.01} pass the 512x4096 "
      "best-response scan at regret 1e-6, and the high bidder's unit-value "
      "utility is constant at 4/e^2 to 1e-8";
  r.target = 0.0;
  r.tolerance = 1e-6;
  const Stopwatch clock;
  Margin m;
  double worst_regret = 0.0;
  VerifyParams params;
  params.value_grid = 512;
  params.bid_grid = 4096;
  params.delta = 1e-6;
  for (const double eps : {0.05, 0.01}) {
    const RegretReport rep = verify_bne(focal_independent(eps), params);
    m.require_zero(rep.passed && rep.method == "closed_form");
    worst_regret = std::max(worst_regret, rep.max_regret);
  }

  // Constant interim utility of the unit-value high bidder: with favored ties
  // at zero, u(b) = (1 - b) B_L(b)^n = 4/e^2 across the whole bid support.
  const FocalProfile fp = focal_independent(0.05);
  double worst_util = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double b = fp.system.lambda * static_cast<double>(k) / 999.0;
    const double win =
        std::pow(cdf(fp.system.bid_dists[1], b), fp.instance.n_low);
    worst_util = std::max(worst_util, std::abs((1.0 - b) * win - 4.0 * inv_e2()));
  }
  m.require(worst_util - 1e-8);

  r.seconds = clock.seconds();
  r.computed = worst_regret;
  r.passed = m.passed() && worst_regret <= r.tolerance + 1e-12 && r.seconds < 60.0;
  r.detail = "worst regret " + fmt12(worst_regret) + "; constant-utility gap " +
             fmt12(worst_util);
  return r;
}

inline ClaimResult claim_bne_correlated() {
  ClaimResult r;
  r.id = "bne-correlated";
  r.statement =
      "correlated focal profiles at eps in {0.5, 0.1, 0.01} verify exactly: "
      "low-bidder regret is identically zero and the high bidder's is below "
      "1e-9";
  r.target = 0.0;
  r.tolerance = 1e-9;
  const Stopwatch clock;
  Margin m;
  double worst = 0.0;
  VerifyParams params;
  params.delta = 1e-9;
  for (const double eps : {0.5, 0.1, 0.01}) {
    const RegretReport rep = verify_bne(focal_correlated(eps), params);
    m.require_zero(rep.passed && rep.method == "exact");
    for (const RegretWitness& w : rep.per_bidder) {
      if (w.bidder != 0) m.require_zero(w.regret == 0.0);
    }
    worst = std::max(worst, rep.max_regret);
  }
  r.seconds = clock.seconds();
  r.computed = worst;
  r.passed = m.passed() && worst <= r.tolerance + 1e-15 && r.seconds < 5.0;
  r.detail = "worst high-bidder regret " + fmt12(worst) +
             "; low-bidder regrets identically zero";
  return r;
}

inline ClaimResult claim_transform_universal() {
  ClaimResult r;
  r.id = "transform-universal";
  r.statement =
      "for delta in {0.01, 0.001} the tie-free shift moves every per-value "
      "bid law by at most delta in worst-case quantile gap, keeps welfare at "
      "the original closed form under three adversarial tie rules (3 sigma at "
      "1e6 samples), and passes the delta-equilibrium scan under every rule";
  r.target = 0.0;
  r.tolerance = 0.0;
  const Stopwatch clock;
  Margin m;
  double worst_emd_excess = -1.0;
  double worst_welfare_gap = 0.0;
  double worst_regret_excess = -1.0;

  VerifyParams params;
  params.value_grid = 256;
  params.bid_grid = 2048;

  for (const bool indep : {true, false}) {
    const FocalProfile fp = indep ? focal_independent(0.1) : focal_correlated(0.4);
    const std::vector<TieBreakRule> rules = detail::adversarial_rules(fp.instance.bidders());
    for (const double delta : {0.01, 0.001}) {
      const IndependentStrategy tr = approx_transform(fp, delta);

      // Per-value displacement: worst-case quantile gap at most delta.
      for (const int bidder : fp.instance.rep_bidders) {
        for (const double v :
             probe_value_grid(fp.instance.marginals[bidder], 48)) {
          const double gap =
              emd(fp.strategy.bidders[bidder].dist_of_value(v),
                  tr.bidders[bidder].dist_of_value(v),
                  std::numeric_limits<double>::infinity());
          m.require(gap - delta - 1e-12);
          worst_emd_excess = std::max(worst_emd_excess, gap - delta);
        }
      }

      // The shifted profile stays a delta-equilibrium under every rule.
      const UniversalApproxReport rep =
          verify_universal_approx(fp, delta, rules, params);
      m.require_zero(rep.passed);
      m.require(rep.max_regret - delta - 1e-12);
      worst_regret_excess = std::max(worst_regret_excess, rep.max_regret - delta);

      // Welfare is preserved: the strict winner coincides with the favored
      // winner draw by draw, so any rule reproduces the original closed form.
      // Sampled on the correlated family, where a run is one shared draw.
      if (!indep) {
        const double formula = auction_welfare_formula(fp);
        for (std::size_t k = 0; k < rules.size(); ++k) {
          const McEstimate est = auction_welfare_mc(
              fp.instance, tr, rules[k], 1000000, 555000 + static_cast<int>(k));
          const double gap = std::abs(est.mean - formula);
          m.require(gap - 3.0 * est.std_error);
          worst_welfare_gap = std::max(worst_welfare_gap, gap);
        }
      }
    }
  }
  r.seconds = clock.seconds();
  r.computed = m.worst;
  r.passed = m.passed();
  r.detail = "worst quantile-gap excess " + fmt12(worst_emd_excess) +
             "; worst regret excess " + fmt12(worst_regret_excess) +
             "; worst welfare gap " + fmt12(worst_welfare_gap) +
             " (correlated, 1e6 samples per rule)";
  return r;
}

inline ClaimResult claim_bce_coordinated() {
  ClaimResult r;
  r.id = "bce-coordinated";
  r.statement =
      "the coordinated strategy hands the good to a maximum-value bidder in "
      "every one of 1e6 draws on both families (auction/optimal welfare ratio "
      "exactly 1) and passes the conditioned and coarse regret checks at "
      "delta = 0.01";
  r.target = 0.0;
  r.tolerance = 0.0;
  const Stopwatch clock;
  Margin m;
  const JointStrategy js = efficient_joint_strategy(0.01);
  long long mismatches = 0;
  std::string ratios;

  const Instance insts[] = {build_independent_instance(0.1),
                            build_correlated_instance(0.5)};
  for (const Instance& inst : insts) {
    MeanAccumulator opt_acc;
    MeanAccumulator fpa_acc;
    const TieBreakRule uniform{TieKind::kUniformRandom, 0, {}};
    for (long long k = 0; k < 1000000; ++k) {
      Rng rng = Rng::substream(606060, static_cast<std::uint64_t>(k));
      const std::vector<double> v = sample_values(inst, rng);
      const std::vector<double> bids = js.bids_of_values(v);
      const double maxv = *std::max_element(v.begin(), v.end());
      const double u = rng.uniform();
      if (v[static_cast<std::size_t>(tie_break(inst.tie_rule, bids, u))] != maxv) {
        ++mismatches;
      }
      if (v[static_cast<std::size_t>(tie_break(uniform, bids, u))] != maxv) {
        ++mismatches;
      }
      opt_acc.add(maxv);
      fpa_acc.add(v[static_cast<std::size_t>(tie_break(inst.tie_rule, bids, u))]);
    }
    const double ratio = fpa_acc.mean / opt_acc.mean;
    m.require_zero(ratio == 1.0);
    ratios += (ratios.empty() ? "" : " ") + fmt12(ratio);
  }
  m.require(static_cast<double>(mismatches));

  VerifyParams params;
  params.value_grid = 128;
  params.bid_grid = 1024;
  params.delta = 0.01;
  double worst_excess = -1.0;
  for (const Instance& inst : insts) {
    const RegretReport bce = verify_bce(inst, js, params);
    const RegretReport bcce = verify_bcce(inst, js, params);
    m.require_zero(bce.passed && bcce.passed);
    m.require(bcce.max_regret - bce.max_regret - 1e-12);
    worst_excess = std::max(
        worst_excess, std::max(bce.max_regret - params.delta - 3.0 * bce.mc_std_error,
                               bcce.max_regret - params.delta - 3.0 * bcce.mc_std_error));
  }

  r.seconds = clock.seconds();
  r.computed = m.worst;
  r.passed = m.passed();
  r.detail = "welfare ratios " + ratios + "; per-draw mismatches " +
             std::to_string(mismatches) + "; worst regret excess " +
             fmt12(worst_excess);
  return r;
}

inline ClaimResult claim_ode_crosscheck() {
  ClaimResult r;
  r.id = "ode-crosscheck";
  r.statement =
      "the first-order-condition ODE at 1e4 grid nodes reproduces the "
      "closed-form bid laws within sup-norm 1e-8 and the support top within "
      "1e-8";
  r.target = 0.0;
  r.tolerance = 1e-8;
  const Stopwatch clock;
  const double eps = 0.05;
  const BidSystem sys = solve_bid_ode(eps, 10000);
  const int n = build_independent_instance(eps).n_low;

  double worst = std::abs(sys.lambda - lambda_star());
  const Dist1D& low = sys.bid_dists[1];
  const Dist1D& high = sys.bid_dists[0];
  for (int k = 0; k < 10000; ++k) {
    const double b = sys.lambda * static_cast<double>(k) / 9999.0;
    const double closed_low =
        std::pow(4.0 * inv_e2() / (1.0 - b), 1.0 / static_cast<double>(n));
    worst = std::max(worst, std::abs(cdf(low, b) - closed_low));
    const double t = 1.0 + static_cast<double>(k) / 9999.0;
    const double bh = 1.0 - t * t * std::exp(2.0 - 2.0 * t);
    worst = std::max(worst, std::abs(cdf(high, bh) - t * t / 4.0));
  }
  r.seconds = clock.seconds();
  r.computed = worst;
  r.passed = worst <= r.tolerance;
  r.detail = "sup-norm error " + fmt12(worst) + " over both bid laws and the support top";
  return r;
}

inline ClaimResult claim_property_suites() {
  ClaimResult r;
  r.id = "property-suites";
  r.statement =
      "randomized property suites (distribution laws, tie-break allocation, "
      "bid-to-value monotonicity, coarse-vs-conditioned regret nesting) pass "
      "100 cases each";
  r.target = 0.0;
  r.tolerance = 0.0;
  const Stopwatch clock;
  long long violations = 0;

  // Distribution laws: monotone cdf, unit mass, order-monotone transport
  // distance, Galois quantile/cdf adjunction.
  {
    Rng rng(11001);
    for (int c = 0; c < 100; ++c) {
      auto random_dist = [&rng]() {
        Dist1D d;
        const int atoms = 1 + static_cast<int>(rng.uniform() * 3.0);
        double mass_left = 1.0;
        double x = rng.uniform() * 0.3;
        for (int a = 0; a < atoms; ++a) {
          const double mass = (a + 1 == atoms && rng.uniform() < 0.5)
                                  ? mass_left
                                  : mass_left * (0.2 + 0.5 * rng.uniform());
          d.atoms.push_back({x, mass});
          mass_left -= mass;
          x += 0.05 + rng.uniform() * 0.4;
          if (mass_left <= 1e-9) break;
        }
        if (mass_left > 1e-9) {
          MonotoneCurve curve;
          curve.kind = CurveKind::kUniform;
          curve.t_lo = x + 0.01;
          curve.t_hi = curve.t_lo + 0.1 + rng.uniform();
          curve.p0 = 0.0;
          curve.p1 = mass_left;
          d.curve = curve;
        }
        return finalize(std::move(d));
      };
      const Dist1D a = random_dist();
      const Dist1D b = random_dist();

      double prev = -1.0;
      for (int k = 0; k <= 64; ++k) {
        const double v =
            a.support_lo + (a.support_hi - a.support_lo) * static_cast<double>(k) / 64.0;
        const double c0 = cdf(a, v);
        if (c0 + 1e-12 < prev) ++violations;
        prev = c0;
      }
      if (std::abs(cdf(a, a.support_hi) - 1.0) > 1e-12) ++violations;

      const double e1 = emd(a, b, 1.0);
      const double e2 = emd(a, b, 2.0);
      const double einf = emd(a, b, std::numeric_limits<double>::infinity());
      if (e1 > e2 + 1e-12 || e2 > einf + 1e-12) ++violations;

      const double q = rng.uniform();
      if (cdf(a, quantile(a, q)) + 1e-12 < q) ++violations;
      const double v = a.support_lo + (a.support_hi - a.support_lo) * rng.uniform();
      if (quantile(a, cdf(a, v)) > v + 1e-12) ++violations;
    }
  }

  // Tie-break allocation: the winner always holds a maximal bid.
  {
    Rng rng(11002);
    const double levels[] = {0.0, 0.25, 0.25, 0.5, 1.0};
    for (int c = 0; c < 100; ++c) {
      const int m = 2 + static_cast<int>(rng.uniform() * 5.0);
      std::vector<double> bids(static_cast<std::size_t>(m));
      for (double& b : bids) b = levels[static_cast<int>(rng.uniform() * 5.0)];
      const double top = *std::max_element(bids.begin(), bids.end());
      std::vector<int> perm(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) perm[static_cast<std::size_t>(i)] = m - 1 - i;
      const TieBreakRule rules[] = {
          {TieKind::kFavorBidderAtZero, static_cast<int>(rng.uniform() * m), {}},
          {TieKind::kLowestIndex, 0, {}},
          {TieKind::kUniformRandom, 0, {}},
          {TieKind::kPriorityOrder, 0, perm}};
      for (const TieBreakRule& rule : rules) {
        const int w = tie_break(rule, bids, rng.uniform());
        if (bids[static_cast<std::size_t>(w)] != top) ++violations;
      }
    }
  }

  // Bid-to-value maps: strictly increasing for the low bidder, constant one
  // for the high bidder, on independent focal profiles across eps.
  {
    Rng rng(11003);
    for (int c = 0; c < 100; ++c) {
      const double eps = 0.02 + 0.1 * rng.uniform();
      const FocalProfile fp = focal_independent(eps);
      double prev = -1.0;
      for (int k = 1; k <= 24; ++k) {
        const double b = fp.system.lambda * static_cast<double>(k) / 25.0;
        const double phi_low = bid_to_value(fp.system, 1, b);
        const double phi_high = bid_to_value(fp.system, 0, b);
        if (!(phi_low > prev)) ++violations;
        if (std::abs(phi_high - 1.0) > 1e-9) ++violations;
        prev = phi_low;
      }
    }
  }

  // Coarse regret never exceeds conditioned regret on a shared sample pool.
  {
    Rng rng(11004);
    for (int c = 0; c < 100; ++c) {
      const bool indep = c % 2 == 0;
      const double delta = 0.005 + 0.045 * rng.uniform();
      const Instance inst =
          indep ? build_independent_instance(0.06 + 0.06 * rng.uniform(),
                                             2 + c % 3)
                : build_correlated_instance(0.1 + 0.8 * rng.uniform());
      VerifyParams params;
      params.value_grid = 24;
      params.bid_grid = 256;
      params.delta = delta;
      params.samples = 400;
      params.seed = 12000 + static_cast<std::uint64_t>(c);
      const JointStrategy js = efficient_joint_strategy(delta);
      const RegretReport bce = verify_bce(inst, js, params);
      const RegretReport bcce = verify_bcce(inst, js, params);
      if (bcce.max_regret > bce.max_regret + 1e-12) ++violations;
      if (!std::isfinite(bce.max_regret) || !std::isfinite(bcce.max_regret)) {
        ++violations;
      }
    }
  }

  r.seconds = clock.seconds();
  r.computed = static_cast<double>(violations);
  r.passed = violations == 0;
  r.detail = std::to_string(violations) + " violations across 4 suites of 100 cases";
  return r;
}

}  // namespace detail

inline std::vector<std::string> claim_ids() {
  return {"pos-independent", "pos-correlated",     "bne-independent",
          "bne-correlated",  "transform-universal", "bce-coordinated",
          "ode-crosscheck",  "property-suites"};
}

inline ClaimResult run_claim(const std::string& id) {
  if (id == "pos-independent") return detail::claim_pos_independent();
  if (id == "pos-correlated") return detail::claim_pos_correlated();
  if (id == "bne-independent") return detail::claim_bne_independent();
  if (id == "bne-correlated") return detail::claim_bne_correlated();
  if (id == "transform-universal") return detail::claim_transform_universal();
  if (id == "bce-coordinated") return detail::claim_bce_coordinated();
  if (id == "ode-crosscheck") return detail::claim_ode_crosscheck();
  if (id == "property-suites") return detail::claim_property_suites();
  throw std::invalid_argument("unknown claim id: " + id);
}

inline std::vector<ClaimResult> run_claims(const std::vector<std::string>& ids) {
  std::vector<ClaimResult> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) out.push_back(run_claim(id));
  return out;
}

}  // namespace fpa
