#include <doctest.h>

#include <cmath>
#include <vector>

#include "fpa/equilibria.hpp"

using namespace fpa;

TEST_CASE("independent focal profile: induced laws match their closed forms") {
  const FocalProfile fp = focal_independent(0.1);
  CHECK(fp.system.gamma == 0.0);
  CHECK(fp.system.lambda == doctest::Approx(0.458658867053549).epsilon(1e-13));

  // The high bid law has an atom of exactly 1/4 at zero, independent of eps.
  CHECK(atom_mass_at(fp.system.bid_dists[0], 0.0) == doctest::Approx(0.25).epsilon(1e-15));
  const FocalProfile fp2 = focal_independent(0.05);
  CHECK(atom_mass_at(fp2.system.bid_dists[0], 0.0) == doctest::Approx(0.25).epsilon(1e-15));

  // Low bid cdf: ((4/e^2) / (1 - b))^(1/n).
  const int n = fp.instance.n_low;
  for (double b : {0.05, 0.2, 0.4}) {
    const double want = std::pow(4.0 * inv_e2() / (1.0 - b), 1.0 / n);
    CHECK(cdf(fp.system.bid_dists[1], b) == doctest::Approx(want).epsilon(1e-10));
  }

  // High bid cdf at the image of t is t^2 / 4.
  for (double t : {1.25, 1.5, 1.75}) {
    const double b = 1.0 - t * t * std::exp(2.0 - 2.0 * t);
    CHECK(cdf(fp.system.bid_dists[0], b) == doctest::Approx(t * t / 4.0).epsilon(1e-10));
  }
}

TEST_CASE("high bidder's mixture is consistent with the induced bid law") {
  const double eps = 0.1;
  const FocalProfile fp = focal_independent(eps);
  const Dist1D mixture = fp.strategy.bidders[0].dist_of_value(1.0);
  // Atom at zero of mass 1 - (3/4)/(1-eps).
  CHECK(atom_mass_at(mixture, 0.0) == doctest::Approx(1.0 - 0.75 / 0.9).epsilon(1e-13));
  // eps + (1-eps) * mixture_cdf reproduces the induced high bid law.
  for (double b : {0.0, 0.1, 0.25, 0.4, 0.45}) {
    const double lhs = eps + (1.0 - eps) * cdf(mixture, b);
    CHECK(lhs == doctest::Approx(cdf(fp.system.bid_dists[0], b)).epsilon(1e-10));
  }
  // At value 0 the high bidder bids 0.
  const Dist1D at0 = fp.strategy.bidders[0].dist_of_value(0.0);
  CHECK(atom_mass_at(at0, 0.0) == 1.0);
}

TEST_CASE("low bidder's pure strategy pushes the value law onto the bid law") {
  const FocalProfile fp = focal_independent(0.1);
  const Dist1D& values = fp.instance.marginals[1];
  const Dist1D& bids = fp.system.bid_dists[1];
  for (double t : {1.1, 1.4, 1.8, 1.95}) {
    const double v = values.curve->point_at(t);
    const double b = 1.0 - t * t * std::exp(2.0 - 2.0 * t);
    const Dist1D played = fp.strategy.bidders[1].dist_of_value(v);
    CHECK(played.atoms.size() == 1);
    CHECK(played.atoms[0].point == doctest::Approx(b).epsilon(1e-10));
    CHECK(cdf(bids, b) == doctest::Approx(cdf(values, v)).epsilon(1e-9));
  }
  CHECK(atom_mass_at(fp.strategy.bidders[1].dist_of_value(0.0), 0.0) == 1.0);
}

TEST_CASE("inverse bid map: the high bidder is indifferent across the support") {
  const FocalProfile fp = focal_independent(0.1);
  for (double b : {0.01, 0.1, 0.2, 0.3, 0.44}) {
    CHECK(bid_to_value(fp.system, 0, b) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("inverse bid map recovers the low bidder's value") {
  const FocalProfile fp = focal_independent(0.1, 8);
  const double t = 1.5;
  const double b = 1.0 - t * t * std::exp(2.0 - 2.0 * t);
  CHECK(b == doctest::Approx(0.172271257364254776).epsilon(1e-13));
  CHECK(bid_to_value(fp.system, 1, b) ==
        doctest::Approx(0.460176906976687898).epsilon(1e-9));
  // And it agrees with the value curve at the same parameter.
  CHECK(bid_to_value(fp.system, 1, b) ==
        doctest::Approx(fp.instance.marginals[1].curve->point_at(t)).epsilon(1e-9));
}

TEST_CASE("inverse bid map: correlated family") {
  const double eps = 0.5;
  const FocalProfile fp = focal_correlated(eps);
  // For the high bidder the rationalizing value is eps + 1, constant.
  for (double b : {0.05, 0.2, 0.5}) {
    CHECK(bid_to_value(fp.system, 0, b) == doctest::Approx(eps + 1.0).epsilon(1e-9));
  }
}

TEST_CASE("inverse bid map rejects flat competition and out-of-range bids") {
  BidSystem sys;
  sys.bid_dists = {point_mass(0.0), point_mass(0.0)};
  sys.gamma = -1.0;
  sys.lambda = 1.0;
  CHECK_THROWS_AS(bid_to_value(sys, 0, 0.5), std::runtime_error);

  const FocalProfile fp = focal_independent(0.1);
  CHECK_THROWS_AS(bid_to_value(fp.system, 0, fp.system.lambda + 0.1),
                  std::invalid_argument);
}

TEST_CASE("monopolist detection") {
  const FocalProfile ind = focal_independent(0.1);
  const auto who_ind = detect_monopolist(ind);
  REQUIRE(who_ind.has_value());
  CHECK(*who_ind == 0);

  const FocalProfile cor = focal_correlated(0.3);
  const auto who_cor = detect_monopolist(cor);
  REQUIRE(who_cor.has_value());
  CHECK(*who_cor == 0);

  // A two-bidder toy where nobody holds the boundary bid at a higher value.
  FocalProfile toy;
  toy.instance = product_instance({uniform_dist(0.0, 1.0), uniform_dist(0.0, 1.0)});
  toy.strategy.bidders.resize(2);
  for (int i = 0; i < 2; ++i) {
    toy.strategy.bidders[i].dist_of_value = [](double v) { return point_mass(v / 2.0); };
  }
  toy.strategy.bid_dists = {uniform_dist(0.0, 0.5), uniform_dist(0.0, 0.5)};
  toy.system.bid_dists = toy.strategy.bid_dists;
  toy.system.gamma = 0.0;
  toy.system.lambda = 0.5;
  CHECK(!detect_monopolist(toy).has_value());

  // Two boundary winners are inconsistent.
  FocalProfile bad;
  bad.instance = product_instance({two_point(0.0, 0.5, 1.0), two_point(0.0, 0.5, 1.0)});
  bad.strategy.bidders.resize(2);
  for (int i = 0; i < 2; ++i) {
    bad.strategy.bidders[i].dist_of_value = [](double) { return point_mass(0.0); };
  }
  bad.strategy.bid_dists = {point_mass(0.0), point_mass(0.0)};
  bad.system.bid_dists = bad.strategy.bid_dists;
  bad.system.gamma = 0.0;
  bad.system.lambda = 0.0;
  CHECK_THROWS_AS(detect_monopolist(bad), std::runtime_error);
}

TEST_CASE("approximation shift: independent family structure") {
  const double eps = 0.1;
  const double delta = 0.01;
  const FocalProfile fp = focal_independent(eps);
  const IndependentStrategy tr = approx_transform(fp, delta);

  // Boundary pair: the high bidder's zero-value mass lands at delta/2, the
  // high-value share of the old atom at delta.
  CHECK(atom_mass_at(tr.bid_dists[0], delta / 2.0) == doctest::Approx(eps).epsilon(1e-12));
  CHECK(atom_mass_at(tr.bid_dists[0], delta) == doctest::Approx(0.25 - eps).epsilon(1e-12));
  CHECK(atom_mass_at(tr.bid_dists[1], delta / 2.0) ==
        doctest::Approx(std::pow(4.0 * inv_e2(), 0.1)).epsilon(1e-12));
  CHECK(tr.gamma == doctest::Approx(delta / 2.0).epsilon(1e-15));
  CHECK(tr.lambda == doctest::Approx(lambda_star() + delta).epsilon(1e-12));

  // The continuous pieces move up by exactly delta.
  CHECK(cdf(tr.bid_dists[1], 0.2 + delta) ==
        doctest::Approx(cdf(fp.system.bid_dists[1], 0.2)).epsilon(1e-10));
  CHECK(cdf(tr.bid_dists[0], 0.3 + delta) ==
        doctest::Approx(cdf(fp.system.bid_dists[0], 0.3)).epsilon(1e-10));
}

TEST_CASE("approximation shift: per-value bid laws move by at most delta") {
  const double delta = 0.01;
  const FocalProfile fp = focal_independent(0.1);
  const IndependentStrategy tr = approx_transform(fp, delta);
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<std::pair<int, double>> probes = {{0, 0.0}, {0, 1.0}, {1, 0.0}};
  for (double t : {1.3, 1.7}) {
    probes.emplace_back(1, fp.instance.marginals[1].curve->point_at(t));
  }
  for (const auto& [i, v] : probes) {
    const Dist1D before = fp.strategy.bidders[i].dist_of_value(v);
    const Dist1D after = tr.bidders[i].dist_of_value(v);
    CHECK(emd(before, after, inf) <= delta + 1e-12);
  }
}

TEST_CASE("approximation shift: winner identity is preserved draw by draw") {
  const double delta = 0.01;
  const FocalProfile fp = focal_independent(0.1, 8);
  const IndependentStrategy tr = approx_transform(fp, delta);
  Rng rng(2024);
  const TieBreakRule original_rule = fp.instance.tie_rule;
  const TieBreakRule adversarial = {TieKind::kLowestIndex, 0, {}};
  for (int rep = 0; rep < 2000; ++rep) {
    const std::vector<double> v = sample_values(fp.instance, rng);
    std::vector<double> b_orig(v.size());
    std::vector<double> b_new(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double u = rng.uniform();
      b_orig[i] = sample(fp.strategy.bidders[i].dist_of_value(v[i]), u);
      b_new[i] = sample(tr.bidders[i].dist_of_value(v[i]), u);
    }
    const double u_tie = rng.uniform();
    const int w_orig = tie_break(original_rule, b_orig, u_tie);
    const int w_new = tie_break(adversarial, b_new, u_tie);
    CHECK(v[w_orig] == v[w_new]);
  }
}

TEST_CASE("approximation shift: correlated family") {
  const double delta = 0.001;
  const FocalProfile fp = focal_correlated(0.25);
  const IndependentStrategy tr = approx_transform(fp, delta);
  // High bidder: value 0 mass eps at delta/2, value 1 mass at delta.
  CHECK(atom_mass_at(tr.bid_dists[0], delta / 2.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(atom_mass_at(tr.bid_dists[0], delta) == doctest::Approx(0.75).epsilon(1e-12));
  // Low bidders bid value + delta above zero, delta/2 at zero value.
  const Dist1D at_v = tr.bidders[1].dist_of_value(0.4);
  CHECK(at_v.atoms[0].point == doctest::Approx(0.4 + delta).epsilon(1e-14));
  const Dist1D at_0 = tr.bidders[1].dist_of_value(0.0);
  CHECK(at_0.atoms[0].point == doctest::Approx(delta / 2.0).epsilon(1e-15));
}

TEST_CASE("efficient joint strategy hands the good to a highest-value bidder") {
  const JointStrategy js = efficient_joint_strategy(0.1);
  const std::vector<double> v = {0.3, 0.7, 0.5};
  const std::vector<double> b = js.bids_of_values(v);
  CHECK(b[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(b[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(b[2] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(tie_break({TieKind::kLowestIndex, 0, {}}, b) == 1);

  // Shading clamps at zero.
  const std::vector<double> small = js.bids_of_values({0.05, 0.9});
  CHECK(small[0] == 0.0);
  CHECK(small[1] == doctest::Approx(0.05).epsilon(1e-15));

  // All competing values zero: the winner still outbids the losers' floor,
  // at a price within delta of the zero second value.
  const std::vector<double> corner = js.bids_of_values({0.0, 0.0, 0.5});
  CHECK(corner[0] == 0.0);
  CHECK(corner[1] == 0.0);
  CHECK(corner[2] == doctest::Approx(0.05).epsilon(1e-15));
  for (TieKind kind : {TieKind::kLowestIndex, TieKind::kUniformRandom,
                       TieKind::kFavorBidderAtZero}) {
    CHECK(tie_break({kind, 0, {}}, corner) == 2);
  }

  // All values zero: nothing to win, everyone stays at zero.
  const std::vector<double> zeros = js.bids_of_values({0.0, 0.0, 0.0});
  CHECK(zeros == std::vector<double>{0.0, 0.0, 0.0});

  // Randomized check: the winner is strict and always a value maximizer.
  Rng rng(12);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> vals = {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
    if (rep % 5 == 0) vals[3] = vals[1];  // exercise duplicated maxima
    const std::vector<double> bids = js.bids_of_values(vals);
    const double vmax = *std::max_element(vals.begin(), vals.end());
    for (TieKind kind : {TieKind::kLowestIndex, TieKind::kUniformRandom,
                         TieKind::kFavorBidderAtZero}) {
      const int w = tie_break({kind, 0, {}}, bids, rng.uniform());
      CHECK(vals[w] == vmax);
    }
  }
  CHECK_THROWS_AS(efficient_joint_strategy(0.0), std::invalid_argument);
}

TEST_CASE("ode re-derivation matches the closed-form bid laws") {
  const BidSystem sys = solve_bid_ode(0.1, 2000);
  CHECK(std::abs(sys.lambda - lambda_star()) < 1e-9);
  CHECK(std::abs(atom_mass_at(sys.bid_dists[0], 0.0) - 0.25) < 1e-9);
  const int n = 10;
  double worst = 0.0;
  for (double b = 0.0; b < sys.lambda; b += sys.lambda / 97.0) {
    const double want = std::pow(4.0 * inv_e2() / (1.0 - b), 1.0 / n);
    worst = std::max(worst, std::abs(cdf(sys.bid_dists[1], b) - want));
  }
  // Tabulated linear interpolation dominates the error at this grid size.
  CHECK(worst < 1e-6);
}
