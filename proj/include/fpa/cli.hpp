#pragma once

// Command-line front end. Subcommands tie the builders, closed-form
// equilibria, verification, and welfare paths into reproducible experiments:
// identical (flags, seed) produce byte-identical artifacts. Exit codes:
// 0 success or verified pass, 1 verification failure, 2 configuration error.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "fpa/reproduce.hpp"

namespace fpa {
namespace cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Output target: explicit --out wins, else FPA_OUT_DIR/<default-name>, else
// stdout (empty path).
inline std::string resolve_out(const std::string& flag, const std::string& name) {
  if (!flag.empty()) return flag;
  const char* dir = std::getenv("FPA_OUT_DIR");
  if (dir != nullptr && dir[0] != '\0') return std::string(dir) + "/" + name;
  return {};
}

inline void write_artifact(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open output path: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ConfigError("cannot write output path: " + path);
}

inline Family family_from_flag(const std::string& s) {
  if (s == "independent") return Family::kIndependentProduct;
  if (s == "correlated") return Family::kCorrelatedPair;
  throw ConfigError("unknown family: '" + s + "' (expected independent|correlated)");
}

// Rule specs: favor_at_zero[:bidder], lowest_index, uniform_random,
// priority:i,j,... (a permutation of the bidder indices).
inline TieBreakRule rule_from_spec(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string tail =
      colon == std::string::npos ? std::string{} : spec.substr(colon + 1);
  TieBreakRule rule;
  if (head == "favor_at_zero") {
    rule.kind = TieKind::kFavorBidderAtZero;
    if (!tail.empty()) rule.favored = std::stoi(tail);
    return rule;
  }
  if (head == "lowest_index") {
    rule.kind = TieKind::kLowestIndex;
    return rule;
  }
  if (head == "uniform_random") {
    rule.kind = TieKind::kUniformRandom;
    return rule;
  }
  if (head == "priority") {
    rule.kind = TieKind::kPriorityOrder;
    std::size_t pos = 0;
    while (pos < tail.size()) {
      const std::size_t next = tail.find(',', pos);
      rule.priority.push_back(std::stoi(tail.substr(pos, next - pos)));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (rule.priority.empty()) throw ConfigError("priority rule needs indices");
    return rule;
  }
  throw ConfigError("unknown tie rule spec: '" + spec + "'");
}

// JSON config override: each key is a long flag of the chosen subcommand and
// supplies a default, applied only when the flag is absent from the command
// line. Arrays repeat the flag; booleans inject bare switches when true.
inline std::vector<std::string> apply_config_defaults(std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config file: " + config_path);
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid config JSON: " + std::string(e.what()));
  }
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");

  auto user_has = [&args](const std::string& flag) {
    for (const std::string& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  auto value_text = [](const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return fmt12(v.get<double>());
    return v.dump();
  };
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (user_has(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& item : value) {
        args.push_back(flag);
        args.push_back(value_text(item));
      }
    } else {
      args.push_back(flag);
      args.push_back(value_text(value));
    }
  }
  return args;
}

inline std::vector<TieBreakRule> default_adversarial_rules(int bidders) {
  return fpa::detail::adversarial_rules(bidders);
}

}  // namespace detail

// Bid-law and value-law samples for external plotting. Columns: bid b, the
// high and representative-low bid CDFs at b, the low bid-to-value map at b
// (clamped inside the open support), then the low value curve v and its CDF
// V_L on a matching parameter grid. grid >= 2 rows span the full supports.
inline std::string plot_data_csv(const FocalProfile& fp, int grid) {
  if (grid < 2) throw ConfigError("plot grid must be >= 2");
  const int low = fp.instance.high_index == 0 ? 1 : 0;
  const int high = fp.instance.high_index;
  const MonotoneCurve& values = *fp.instance.marginals[low].curve;
  const double lambda = fp.system.lambda;

  std::string out = "b,B_H,B_L,phi_L,v,V_L\n";
  for (int k = 0; k < grid; ++k) {
    const double frac = static_cast<double>(k) / (grid - 1);
    const double b = lambda * frac;
    const double inner = std::min(std::max(b, 1e-9), lambda - 1e-9);
    const double t = values.t_lo + (values.t_hi - values.t_lo) * frac;
    const double v = values.point_at(t);
    out += fmt12(b) + "," + fmt12(cdf(fp.system.bid_dists[high], b)) + "," +
           fmt12(cdf(fp.system.bid_dists[low], b)) + "," +
           fmt12(bid_to_value(fp.system, low, inner)) + "," + fmt12(v) + "," +
           fmt12(cdf(fp.instance.marginals[low], v)) + "\n";
  }
  return out;
}

inline void emit_plot_data(const FocalProfile& fp, int grid, const std::string& path) {
  detail::write_artifact(path, plot_data_csv(fp, grid));
}

inline int run(int argc, const char* const* argv) {
  CLI::App app{"first-price auction equilibria, verification, and welfare"};
  app.require_subcommand(0, 1);
  app.footer(
      "Every subcommand also accepts --config FILE, a JSON object of default\n"
      "flag values (command-line flags win). FPA_OUT_DIR sets the default\n"
      "output directory; without it artifacts go to stdout.");

  std::string family_flag;
  double eps = std::numeric_limits<double>::quiet_NaN();
  int n_low_override = 0;
  std::string out_flag;

  CLI::App* c_instance =
      app.add_subcommand("instance", "emit one auction instance as JSON");
  c_instance->add_option("--family", family_flag, "independent|correlated");
  c_instance->add_option("--eps", eps, "family parameter");
  c_instance->add_option("--n-low", n_low_override,
                         "independent family only: override the low-bidder count");
  c_instance->add_option("--out", out_flag, "output path (default stdout)");

  CLI::App* c_equilibrium =
      app.add_subcommand("equilibrium", "closed-form equilibrium artifacts");
  int plot_grid = 200;
  CLI::App* c_export = c_equilibrium->add_subcommand(
      "export", "sample the bid laws and value curve as CSV");
  c_export->add_option("--family", family_flag, "independent|correlated");
  c_export->add_option("--eps", eps, "family parameter");
  c_export->add_option("--grid", plot_grid, "row count, >= 2");
  c_export->add_option("--out", out_flag, "output path (default stdout)");

  std::string kind = "bne";
  double delta = std::numeric_limits<double>::quiet_NaN();
  int value_grid = 0;
  int bid_grid = 0;
  long samples = 20000;
  std::uint64_t seed = 7001;
  std::vector<std::string> rule_specs;
  CLI::App* c_verify =
      app.add_subcommand("verify", "equilibrium and regret verification");
  c_verify->add_option("--kind", kind, "bne|universal|bce|bcce (default bne)");
  c_verify->add_option("--family", family_flag, "independent|correlated");
  c_verify->add_option("--eps", eps, "family parameter");
  c_verify->add_option("--delta", delta,
                       "regret budget (default 1e-6 for bne, 0.01 otherwise)");
  double transform_delta = std::numeric_limits<double>::quiet_NaN();
  c_verify->add_option(
      "--transform-delta", transform_delta,
      "universal kind only: shift used to build the tie-free profile "
      "(default --delta); a larger shift than budget fails honestly");
  c_verify->add_option("--value-grid", value_grid, "value grid size (0 = per-kind default)");
  c_verify->add_option("--bid-grid", bid_grid, "bid grid size (0 = per-kind default)");
  c_verify->add_option("--samples", samples, "Monte Carlo draws for bce|bcce");
  c_verify->add_option("--seed", seed, "substream root for those draws");
  c_verify->add_option("--rules", rule_specs,
                       "tie rule specs for --kind universal (repeatable): "
                       "favor_at_zero[:i], lowest_index, uniform_random, priority:i,j,...");
  c_verify->add_option("--out", out_flag, "output path (default stdout)");

  std::string welfare_family = "independent";
  std::string method = "closed_form";
  std::string format = "csv";
  std::vector<double> eps_list;
  long long welfare_samples = 200000;
  std::uint64_t welfare_seed = 9001;
  CLI::App* c_welfare = app.add_subcommand("welfare", "efficiency tables");
  CLI::App* c_table =
      c_welfare->add_subcommand("table", "per-eps optimal vs auction welfare");
  c_table->add_option("--family", welfare_family, "independent|correlated|bce");
  c_table->add_option("--eps", eps_list, "comma-separated eps values")
      ->delimiter(',');
  c_table->add_option("--method", method, "closed_form|mc");
  c_table->add_option("--samples", welfare_samples, "Monte Carlo draws per row");
  c_table->add_option("--seed", welfare_seed, "substream root; OPT and FPA share it");
  c_table->add_option("--format", format, "csv|json");
  c_table->add_option("--out", out_flag, "output path (default stdout)");

  std::vector<std::string> claims;
  bool all_claims = false;
  CLI::App* c_reproduce =
      app.add_subcommand("reproduce", "re-derive the headline claims");
  c_reproduce->add_option("--claim", claims, "claim id (repeatable)");
  c_reproduce->add_flag("--all", all_claims, "run every claim (default when no --claim)");
  c_reproduce->add_option("--out", out_flag, "manifest path (default stdout)");

  try {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    args = detail::apply_config_defaults(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  try {
    if (c_instance->parsed()) {
      if (family_flag.empty() || !std::isfinite(eps)) {
        throw ConfigError("instance needs --family and --eps");
      }
      const Instance inst =
          detail::family_from_flag(family_flag) == Family::kIndependentProduct
              ? build_independent_instance(eps, n_low_override)
              : build_correlated_instance(eps);
      const nlohmann::json j = inst;
      detail::write_artifact(detail::resolve_out(out_flag, "instance.json"),
                             j.dump(2) + "\n");
      return 0;
    }

    if (c_export->parsed()) {
      if (family_flag.empty() || !std::isfinite(eps)) {
        throw ConfigError("equilibrium export needs --family and --eps");
      }
      const FocalProfile fp =
          detail::family_from_flag(family_flag) == Family::kIndependentProduct
              ? focal_independent(eps)
              : focal_correlated(eps);
      emit_plot_data(fp, plot_grid,
                     detail::resolve_out(out_flag, "equilibrium.csv"));
      return 0;
    }

    if (c_verify->parsed()) {
      if (family_flag.empty() || !std::isfinite(eps)) {
        throw ConfigError("verify needs --family and --eps");
      }
      const bool indep =
          detail::family_from_flag(family_flag) == Family::kIndependentProduct;
      VerifyParams params;
      params.samples = samples;
      params.seed = seed;
      nlohmann::json j;
      bool passed = false;
      if (kind == "bne") {
        params.value_grid = value_grid > 0 ? value_grid : 512;
        params.bid_grid = bid_grid > 0 ? bid_grid : 4096;
        params.delta = std::isfinite(delta) ? delta : 1e-6;
        const RegretReport rep =
            verify_bne(indep ? focal_independent(eps) : focal_correlated(eps), params);
        j = rep;
        passed = rep.passed;
      } else if (kind == "universal") {
        params.value_grid = value_grid > 0 ? value_grid : 256;
        params.bid_grid = bid_grid > 0 ? bid_grid : 2048;
        const double d = std::isfinite(delta) ? delta : 0.01;
        const FocalProfile fp = indep ? focal_independent(eps) : focal_correlated(eps);
        std::vector<TieBreakRule> rules;
        for (const std::string& spec : rule_specs) {
          rules.push_back(detail::rule_from_spec(spec));
        }
        if (rules.empty()) {
          rules = detail::default_adversarial_rules(fp.instance.bidders());
        }
        const double shift = std::isfinite(transform_delta) ? transform_delta : d;
        const UniversalApproxReport rep =
            verify_universal_approx(fp, d, shift, rules, params);
        j = rep;
        passed = rep.passed;
      } else if (kind == "bce" || kind == "bcce") {
        params.value_grid = value_grid > 0 ? value_grid : 128;
        params.bid_grid = bid_grid > 0 ? bid_grid : 1024;
        params.delta = std::isfinite(delta) ? delta : 0.01;
        const Instance inst =
            indep ? build_independent_instance(eps) : build_correlated_instance(eps);
        const JointStrategy js = efficient_joint_strategy(params.delta);
        const RegretReport rep =
            kind == "bce" ? verify_bce(inst, js, params) : verify_bcce(inst, js, params);
        j = rep;
        passed = rep.passed;
      } else {
        throw ConfigError("unknown --kind: '" + kind + "'");
      }
      detail::write_artifact(detail::resolve_out(out_flag, "verify.json"),
                             j.dump(2) + "\n");
      return passed ? 0 : 1;
    }

    if (c_table->parsed()) {
      if (eps_list.empty()) throw ConfigError("welfare table needs --eps");
      WelfareFamily family;
      if (welfare_family == "independent") {
        family = WelfareFamily::kIndependent;
      } else if (welfare_family == "correlated") {
        family = WelfareFamily::kCorrelated;
      } else if (welfare_family == "bce") {
        family = WelfareFamily::kBce;
      } else {
        throw ConfigError("unknown welfare family: '" + welfare_family + "'");
      }
      WelfareMethod m;
      if (method == "closed_form") {
        m = WelfareMethod::kClosedForm;
      } else if (method == "mc" || method == "monte_carlo") {
        m = WelfareMethod::kMonteCarlo;
      } else {
        throw ConfigError("unknown welfare method: '" + method + "'");
      }
      const std::vector<WelfareReport> rows =
          efficiency_table(family, eps_list, m, welfare_samples, welfare_seed);
      std::string name;
      std::string content;
      if (format == "csv") {
        name = "welfare.csv";
        content = welfare_csv(rows);
      } else if (format == "json") {
        name = "welfare.json";
        content = nlohmann::json(rows).dump(2) + "\n";
      } else {
        throw ConfigError("unknown --format: '" + format + "'");
      }
      detail::write_artifact(detail::resolve_out(out_flag, name), content);
      return 0;
    }

    if (c_reproduce->parsed()) {
      std::vector<std::string> ids = claims;
      if (all_claims || ids.empty()) ids = claim_ids();
      std::vector<ClaimResult> results;
      results.reserve(ids.size());
      for (const std::string& id : ids) {
        results.push_back(run_claim(id));
        const ClaimResult& r = results.back();
        std::fprintf(stderr, "[%s] %s: computed %s vs target %s +/- %s (%.2fs)\n",
                     r.passed ? "PASS" : "FAIL", r.id.c_str(),
                     fmt12(r.computed).c_str(), fmt12(r.target).c_str(),
                     fmt12(r.tolerance).c_str(), r.seconds);
      }
      const nlohmann::json manifest = manifest_json(results);
      detail::write_artifact(detail::resolve_out(out_flag, "reproduce.json"),
                             manifest.dump(2) + "\n");
      return manifest.at("passed").get<bool>() ? 0 : 1;
    }

    std::fputs(app.help().c_str(), stdout);
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace cli
}  // namespace fpa
