// Walkthrough on the textbook case: two bidders with independent uniform
// [0, 1] values, where bidding half one's value is the symmetric equilibrium.
// Shows the welfare pipeline (closed form vs Monte Carlo) and a direct
// best-response sweep confirming the half-value bid is optimal.

#include <cmath>
#include <cstdio>
#include <vector>

#include "fpa/welfare.hpp"

using namespace fpa;

int main() {
  const Instance inst =
      product_instance({uniform_dist(0.0, 1.0), uniform_dist(0.0, 1.0)},
                       {TieKind::kLowestIndex, 0, {}});

  // Half-value bidding keeps the allocation efficient, so auction welfare
  // equals E[max value] = 2/3.
  IndependentStrategy half;
  half.bidders.resize(2);
  for (auto& b : half.bidders) {
    b.dist_of_value = [](double v) { return point_mass(v / 2.0); };
  }

  const double opt = optimal_welfare(inst);
  const McEstimate mc =
      auction_welfare_mc(inst, half, inst.tie_rule, 200000, 2024);
  std::printf("optimal welfare (closed form): %.12g\n", opt);
  std::printf("auction welfare (200k draws):  %.12g +/- %.12g\n", mc.mean,
              mc.std_error);

  // Best-response sweep for a bidder with value 0.8: facing an opponent who
  // bids v/2 with v uniform, a bid b wins with probability min(2b, 1), so
  // expected utility is (0.8 - b) min(2b, 1), maximized at b = 0.4.
  const double value = 0.8;
  auto utility = [value](double b) {
    const double win = b >= 0.5 ? 1.0 : 2.0 * b;
    return (value - b) * win;
  };
  double best_bid = 0.0;
  double best_u = 0.0;
  for (int k = 0; k <= 4000; ++k) {
    const double b = static_cast<double>(k) / 4000.0;
    if (utility(b) > best_u) {
      best_u = utility(b);
      best_bid = b;
    }
  }
  std::printf("best response at value %.12g: bid %.12g (utility %.12g), "
              "half-value bid gives %.12g\n",
              value, best_bid, best_u, utility(value / 2.0));

  const bool ok = std::abs(opt - 2.0 / 3.0) < 1e-12 &&
                  std::abs(mc.mean - opt) < 4.0 * mc.std_error &&
                  std::abs(best_bid - value / 2.0) < 1e-9;
  std::printf("%s\n", ok ? "demo checks pass" : "demo checks FAIL");
  return ok ? 0 : 1;
}
