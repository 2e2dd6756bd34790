#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "fpa/cli.hpp"

using namespace fpa;

namespace {

const std::string kArtifactDir = "cli_artifacts";

std::string art(const std::string& name) {
  std::filesystem::create_directories(kArtifactDir);
  return kArtifactDir + "/" + name;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(FPA_CLI_PATH) + " " + args).c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("numeric output rounds through twelve significant digits") {
  CHECK(fmt12(0.1) == "0.1");
  CHECK(fmt12(0.25) == "0.25");
  for (const double x : {1.0 / 3.0, 4.0 * inv_e2(), lambda_star(), 1e-9, 123456.789}) {
    const double once = round12(x);
    CHECK(round12(once) == once);
    CHECK(std::abs(once - x) <= 1e-11 * std::abs(x));
  }
  CHECK(std::isnan(round12(std::numeric_limits<double>::quiet_NaN())));
  CHECK(round12(std::numeric_limits<double>::infinity()) ==
        std::numeric_limits<double>::infinity());
}

TEST_CASE("instances survive the json round trip byte for byte") {
  for (const Instance& inst : {build_independent_instance(0.1),
                               build_correlated_instance(0.4)}) {
    const nlohmann::json j = inst;
    const Instance back = j.get<Instance>();
    CHECK(back.family == inst.family);
    CHECK(back.eps == doctest::Approx(inst.eps).epsilon(1e-11));
    CHECK(back.bidders() == inst.bidders());
    CHECK(back.high_index == inst.high_index);
    CHECK(back.shared_low == inst.shared_low);
    CHECK(back.n_low == inst.n_low);
    CHECK(back.tie_rule.kind == inst.tie_rule.kind);
    CHECK(back.rep_bidders == inst.rep_bidders);
    for (int i = 0; i < inst.bidders(); ++i) {
      const Dist1D& a = inst.marginals[static_cast<std::size_t>(i)];
      const Dist1D& b = back.marginals[static_cast<std::size_t>(i)];
      REQUIRE(a.atoms.size() == b.atoms.size());
      CHECK(a.curve.has_value() == b.curve.has_value());
      CHECK(b.support_hi == doctest::Approx(a.support_hi).epsilon(1e-11));
      for (int k = 0; k <= 16; ++k) {
        const double v = a.support_lo +
                         (a.support_hi - a.support_lo) * static_cast<double>(k) / 16.0;
        CHECK(cdf(b, v) == doctest::Approx(cdf(a, v)).epsilon(1e-9));
      }
    }
    const nlohmann::json j2 = back;
    CHECK(j.dump() == j2.dump());
  }
}

TEST_CASE("json input validates shape and mass") {
  const nlohmann::json bad_mass = {
      {"atoms", {{{"point", 0.0}, {"mass", 0.4}}}},
  };
  CHECK_THROWS_AS((void)bad_mass.get<Dist1D>(), std::invalid_argument);

  nlohmann::json inst = build_correlated_instance(0.3);
  inst["high_index"] = 7;
  CHECK_THROWS_AS((void)inst.get<Instance>(), std::invalid_argument);
}

TEST_CASE("plot data pins the closed-form endpoints") {
  const FocalProfile fp = focal_independent(0.1);
  const std::vector<std::string> lines = split_lines(cli::plot_data_csv(fp, 3));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "b,B_H,B_L,phi_L,v,V_L");

  double b[3], bh[3], bl[3], phi[3], v[3], vl[3];
  for (int r = 0; r < 3; ++r) {
    REQUIRE(std::sscanf(lines[static_cast<std::size_t>(r) + 1].c_str(),
                        "%lf,%lf,%lf,%lf,%lf,%lf", &b[r], &bh[r], &bl[r], &phi[r],
                        &v[r], &vl[r]) == 6);
  }
  CHECK(b[0] == 0.0);
  CHECK(b[1] == doctest::Approx(lambda_star() / 2.0).epsilon(1e-11));
  CHECK(b[2] == doctest::Approx(lambda_star()).epsilon(1e-11));
  CHECK(bh[0] == 0.25);
  CHECK(bh[2] == 1.0);
  CHECK(bl[2] == 1.0);
  CHECK(vl[2] == 1.0);
  CHECK(v[0] == 0.0);
  CHECK(phi[0] < phi[1]);
  CHECK(phi[1] < phi[2]);

  CHECK_THROWS_AS(cli::plot_data_csv(fp, 1), cli::ConfigError);
}

TEST_CASE("tie rule specs parse") {
  const TieBreakRule favored = cli::detail::rule_from_spec("favor_at_zero:2");
  CHECK(favored.kind == TieKind::kFavorBidderAtZero);
  CHECK(favored.favored == 2);
  CHECK(cli::detail::rule_from_spec("lowest_index").kind == TieKind::kLowestIndex);
  CHECK(cli::detail::rule_from_spec("uniform_random").kind == TieKind::kUniformRandom);
  const TieBreakRule prio = cli::detail::rule_from_spec("priority:1,2,0");
  CHECK(prio.kind == TieKind::kPriorityOrder);
  CHECK(prio.priority == std::vector<int>{1, 2, 0});
  CHECK_THROWS_AS(cli::detail::rule_from_spec("bogus"), cli::ConfigError);
  CHECK_THROWS_AS(cli::detail::rule_from_spec("priority:"), cli::ConfigError);
}

TEST_CASE("config files supply defaults but never override flags") {
  const std::string path = art("config.json");
  {
    std::ofstream out(path);
    out << R"({"family": "correlated", "eps": 0.3})";
  }
  const std::vector<std::string> merged = cli::detail::apply_config_defaults(
      {"instance", "--config", path, "--eps", "0.5"});
  int family_at = -1;
  int eps_count = 0;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    CHECK(merged[i] != "--config");
    if (merged[i] == "--family") family_at = static_cast<int>(i);
    if (merged[i] == "--eps") ++eps_count;
  }
  REQUIRE(family_at >= 0);
  CHECK(merged[static_cast<std::size_t>(family_at) + 1] == "correlated");
  CHECK(eps_count == 1);

  CHECK_THROWS_AS(
      cli::detail::apply_config_defaults({"instance", "--config", art("missing.json")}),
      cli::ConfigError);
}

TEST_CASE("the binary honors the documented exit codes") {
  CHECK(run_cli("instance --family independent --eps 0.5 2>/dev/null") == 2);
  CHECK(run_cli("equilibrium export --family independent --eps 0.1 --grid 1 "
                "2>/dev/null") == 2);
  CHECK(run_cli("no-such-command 2>/dev/null") == 2);
  CHECK(run_cli("--help >/dev/null") == 0);

  const std::string inst_path = art("instance.json");
  CHECK(run_cli("instance --family correlated --eps 0.3 --out " + inst_path) == 0);
  const nlohmann::json inst = nlohmann::json::parse(slurp(inst_path));
  CHECK(inst.at("family") == "correlated");
  CHECK(inst.at("marginals").size() == 3);

  CHECK(run_cli("verify --kind bne --family correlated --eps 0.1 --out " +
                art("verify.json")) == 0);
  CHECK(nlohmann::json::parse(slurp(art("verify.json"))).at("passed") == true);

  // Shifting by more than the regret budget is a genuine failure.
  CHECK(run_cli("verify --kind universal --family correlated --eps 0.4 "
                "--delta 0.001 --transform-delta 0.01 --value-grid 64 "
                "--bid-grid 512 --out " +
                art("verify_fail.json")) == 1);
  CHECK(nlohmann::json::parse(slurp(art("verify_fail.json"))).at("passed") == false);
}

TEST_CASE("identical configurations produce byte-identical artifacts") {
  const std::string args =
      "welfare table --family correlated --eps 0.5,0.1 --method mc "
      "--samples 2000 --seed 42 --out ";
  CHECK(run_cli(args + art("w1.csv")) == 0);
  CHECK(run_cli(args + art("w2.csv")) == 0);
  const std::string first = slurp(art("w1.csv"));
  CHECK(first == slurp(art("w2.csv")));
  CHECK(split_lines(first)[0] == "family,eps,opt,fpa,ratio,bound,gap,method,stderr");

  const std::string rep = "reproduce --claim pos-independent 2>/dev/null --out ";
  CHECK(run_cli(rep + art("r1.json")) == 0);
  CHECK(run_cli(rep + art("r2.json")) == 0);
  CHECK(slurp(art("r1.json")) == slurp(art("r2.json")));
  const nlohmann::json manifest = nlohmann::json::parse(slurp(art("r1.json")));
  CHECK(manifest.at("passed") == true);
  CHECK(manifest.at("claims").at(0).at("id") == "pos-independent");
  CHECK(manifest.at("claims").at(0).contains("seconds") == false);
}

TEST_CASE("the output directory env var names default artifacts") {
  std::filesystem::remove(kArtifactDir + "/instance.json");
  const int code = std::system(("FPA_OUT_DIR=" + kArtifactDir + " " +
                                std::string(FPA_CLI_PATH) +
                                " instance --family correlated --eps 0.25")
                                   .c_str());
  REQUIRE(code != -1);
  CHECK(WEXITSTATUS(code) == 0);
  CHECK(nlohmann::json::parse(slurp(kArtifactDir + "/instance.json")).at("eps") ==
        0.25);
}

TEST_CASE("the binary's welfare table matches the library") {
  const std::string path = art("w_lib.csv");
  CHECK(run_cli("welfare table --family independent --eps 0.1,0.01 --out " + path) == 0);
  const std::vector<WelfareReport> rows = efficiency_table(
      WelfareFamily::kIndependent, {0.1, 0.01}, WelfareMethod::kClosedForm);
  CHECK(slurp(path) == welfare_csv(rows));
}
