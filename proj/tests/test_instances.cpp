#include <doctest.h>

#include <cmath>
#include <vector>

#include "fpa/instances.hpp"

using namespace fpa;

TEST_CASE("independent instance shape") {
  const Instance inst = build_independent_instance(0.1);
  CHECK(inst.n_low == 10);
  CHECK(inst.bidders() == 11);
  CHECK(inst.high_index == 0);
  CHECK(!inst.shared_low);
  CHECK(cdf(inst.marginals[0], 0.0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(cdf(inst.marginals[1], 0.0) ==
        doctest::Approx(0.940474669246161417).epsilon(1e-13));
  CHECK(inst.tie_rule.kind == TieKind::kFavorBidderAtZero);

  const Instance wide = build_independent_instance(0.1, 8);
  CHECK(wide.n_low == 8);
  CHECK(cdf(wide.marginals[1], 0.0) ==
        doctest::Approx(0.926155432398205391).epsilon(1e-13));

  CHECK_THROWS_AS(build_independent_instance(0.2), std::invalid_argument);
  CHECK_THROWS_AS(build_independent_instance(0.0), std::invalid_argument);
}

TEST_CASE("correlated instance shape") {
  const Instance inst = build_correlated_instance(0.5);
  CHECK(inst.bidders() == 3);
  CHECK(inst.shared_low);
  CHECK(cdf(inst.marginals[1], 0.0) ==
        doctest::Approx(0.578586294114294881).epsilon(1e-13));
  CHECK(inst.marginals[1].support_hi ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(build_correlated_instance(1.0), std::invalid_argument);
}

TEST_CASE("correlated sampling duplicates the shared low draw") {
  const Instance inst = build_correlated_instance(0.5);
  Rng rng(42);
  for (int rep = 0; rep < 200; ++rep) {
    const std::vector<double> v = sample_values(inst, rng);
    CHECK(v.size() == 3);
    CHECK(v[1] == v[2]);
    CHECK((v[0] == 0.0 || v[0] == 1.0));
  }
}

TEST_CASE("independent sampling matches marginal frequencies") {
  const Instance inst = build_independent_instance(0.1);
  Rng rng(7);
  const int trials = 20000;
  int high_zero = 0;
  int low_zero = 0;
  for (int rep = 0; rep < trials; ++rep) {
    const std::vector<double> v = sample_values(inst, rng);
    if (v[0] == 0.0) ++high_zero;
    if (v[1] == 0.0) ++low_zero;
  }
  // 3-sigma bands around the marginal atom masses.
  CHECK(std::abs(high_zero / double(trials) - 0.1) < 3.0 * std::sqrt(0.1 * 0.9 / trials));
  const double m0 = cdf(inst.marginals[1], 0.0);
  CHECK(std::abs(low_zero / double(trials) - m0) < 3.0 * std::sqrt(m0 * (1 - m0) / trials));
}

TEST_CASE("tie break rules pick a highest bidder") {
  const std::vector<double> bids = {0.4, 0.7, 0.7, 0.2};
  CHECK(tie_break({TieKind::kLowestIndex, 0, {}}, bids) == 1);
  CHECK(tie_break({TieKind::kPriorityOrder, 0, {2, 1, 0, 3}}, bids) == 2);
  CHECK(tie_break({TieKind::kFavorBidderAtZero, 3, {}}, bids) == 1);
  const std::vector<double> zeros = {0.0, 0.0, 0.0};
  CHECK(tie_break({TieKind::kFavorBidderAtZero, 2, {}}, zeros) == 2);

  // Uniform tie break always lands inside the argmax set.
  Rng rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> b = {rng.uniform(), rng.uniform(), rng.uniform()};
    if (rep % 3 == 0) b[2] = b[0];  // force ties regularly
    const int w = tie_break({TieKind::kUniformRandom, 0, {}}, b, rng.uniform());
    double top = std::max({b[0], b[1], b[2]});
    CHECK(b[w] == top);
  }
}

TEST_CASE("uniform tie break splits evenly") {
  const std::vector<double> bids = {0.5, 0.5};
  Rng rng(11);
  int first = 0;
  const int trials = 10000;
  for (int rep = 0; rep < trials; ++rep) {
    if (tie_break({TieKind::kUniformRandom, 0, {}}, bids, rng.uniform()) == 0) ++first;
  }
  CHECK(std::abs(first / double(trials) - 0.5) < 3.0 * std::sqrt(0.25 / trials));
}
