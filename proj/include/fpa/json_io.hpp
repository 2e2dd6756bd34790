#pragma once

// JSON and CSV encodings. Every floating-point number passes through a
// 12-significant-digit representation before it is stored, so repeated runs
// with one config produce byte-identical artifacts and printed values match
// the documented tolerances digit for digit. Distributions and instances
// round-trip; reports are output only.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fpa/dist.hpp"
#include "fpa/instances.hpp"
#include "fpa/verify.hpp"
#include "fpa/welfare.hpp"

namespace fpa {

// 12 significant digits; %g keeps integral values short.
inline std::string fmt12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

// The double that re-parsing the printed form yields; JSON stores this so the
// artifact and its textual views agree exactly.
inline double round12(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(fmt12(x).c_str(), nullptr);
}

namespace detail {

// Non-finite values have no JSON number; encode them as strings.
inline nlohmann::json json_num(double x) {
  if (std::isfinite(x)) return round12(x);
  return fmt12(x);
}

}  // namespace detail

inline const char* to_string(CurveKind k) {
  switch (k) {
    case CurveKind::kUniform: return "uniform";
    case CurveKind::kValueLowIndependent: return "independent_value_low";
    case CurveKind::kBidLowIndependent: return "independent_bid_low";
    case CurveKind::kBidHighIndependent: return "independent_bid_high";
    case CurveKind::kBidHighMixture: return "high_bid_mixture";
    case CurveKind::kValueLowCorrelated: return "correlated_value_low";
    case CurveKind::kTabulated: return "tabulated";
  }
  throw std::logic_error("to_string: unknown curve kind");
}

inline CurveKind curve_kind_from(const std::string& s) {
  if (s == "uniform") return CurveKind::kUniform;
  if (s == "independent_value_low") return CurveKind::kValueLowIndependent;
  if (s == "independent_bid_low") return CurveKind::kBidLowIndependent;
  if (s == "independent_bid_high") return CurveKind::kBidHighIndependent;
  if (s == "high_bid_mixture") return CurveKind::kBidHighMixture;
  if (s == "correlated_value_low") return CurveKind::kValueLowCorrelated;
  if (s == "tabulated") return CurveKind::kTabulated;
  throw std::invalid_argument("unknown curve kind: " + s);
}

inline const char* to_string(TieKind k) {
  switch (k) {
    case TieKind::kFavorBidderAtZero: return "favor_at_zero";
    case TieKind::kLowestIndex: return "lowest_index";
    case TieKind::kUniformRandom: return "uniform_random";
    case TieKind::kPriorityOrder: return "priority";
  }
  throw std::logic_error("to_string: unknown tie kind");
}

inline TieKind tie_kind_from(const std::string& s) {
  if (s == "favor_at_zero") return TieKind::kFavorBidderAtZero;
  if (s == "lowest_index") return TieKind::kLowestIndex;
  if (s == "uniform_random") return TieKind::kUniformRandom;
  if (s == "priority") return TieKind::kPriorityOrder;
  throw std::invalid_argument("unknown tie kind: " + s);
}

inline const char* to_string(Family f) {
  return f == Family::kIndependentProduct ? "independent" : "correlated";
}

inline Family family_from(const std::string& s) {
  if (s == "independent") return Family::kIndependentProduct;
  if (s == "correlated") return Family::kCorrelatedPair;
  throw std::invalid_argument("unknown family: " + s);
}

inline void to_json(nlohmann::json& j, const Atom& a) {
  j = {{"point", round12(a.point)}, {"mass", round12(a.mass)}};
}

inline void from_json(const nlohmann::json& j, Atom& a) {
  a.point = j.at("point").get<double>();
  a.mass = j.at("mass").get<double>();
}

inline void to_json(nlohmann::json& j, const MonotoneCurve& c) {
  nlohmann::json params = {{"p0", round12(c.p0)},
                           {"p1", round12(c.p1)},
                           {"shift", round12(c.shift)}};
  if (c.kind == CurveKind::kTabulated) {
    nlohmann::json xs = nlohmann::json::array();
    nlohmann::json cs = nlohmann::json::array();
    for (double x : c.xs) xs.push_back(round12(x));
    for (double v : c.cs) cs.push_back(round12(v));
    params["xs"] = std::move(xs);
    params["cs"] = std::move(cs);
  }
  j = {{"kind", to_string(c.kind)},
       {"t_lo", round12(c.t_lo)},
       {"t_hi", round12(c.t_hi)},
       {"params", std::move(params)}};
}

inline void from_json(const nlohmann::json& j, MonotoneCurve& c) {
  c.kind = curve_kind_from(j.at("kind").get<std::string>());
  c.t_lo = j.at("t_lo").get<double>();
  c.t_hi = j.at("t_hi").get<double>();
  const nlohmann::json& params = j.at("params");
  c.p0 = params.value("p0", 0.0);
  c.p1 = params.value("p1", 0.0);
  c.shift = params.value("shift", 0.0);
  if (c.kind == CurveKind::kTabulated) {
    c.xs = params.at("xs").get<std::vector<double>>();
    c.cs = params.at("cs").get<std::vector<double>>();
  }
}

inline void to_json(nlohmann::json& j, const Dist1D& d) {
  j = {{"atoms", d.atoms},
       {"support", {round12(d.support_lo), round12(d.support_hi)}}};
  if (d.curve) j["curve"] = *d.curve;
}

inline void from_json(const nlohmann::json& j, Dist1D& d) {
  Dist1D raw;
  raw.atoms = j.at("atoms").get<std::vector<Atom>>();
  if (j.contains("curve")) raw.curve = j.at("curve").get<MonotoneCurve>();
  d = finalize(std::move(raw));  // recomputes the support and validates
}

inline void to_json(nlohmann::json& j, const TieBreakRule& r) {
  j = {{"kind", to_string(r.kind)}};
  if (r.kind == TieKind::kFavorBidderAtZero) j["favored"] = r.favored;
  if (r.kind == TieKind::kPriorityOrder) j["priority"] = r.priority;
}

inline void from_json(const nlohmann::json& j, TieBreakRule& r) {
  r.kind = tie_kind_from(j.at("kind").get<std::string>());
  r.favored = j.value("favored", 0);
  r.priority = j.value("priority", std::vector<int>{});
}

inline void to_json(nlohmann::json& j, const Instance& inst) {
  j = {{"family", to_string(inst.family)},
       {"eps", round12(inst.eps)},
       {"n", inst.n_low},
       {"high_index", inst.high_index},
       {"shared_low", inst.shared_low},
       {"tie_rule", inst.tie_rule},
       {"marginals", inst.marginals},
       {"rep_bidders", inst.rep_bidders}};
}

inline void from_json(const nlohmann::json& j, Instance& inst) {
  inst.family = family_from(j.at("family").get<std::string>());
  inst.eps = j.at("eps").get<double>();
  inst.n_low = j.at("n").get<int>();
  inst.high_index = j.value("high_index", 0);
  inst.shared_low = j.value("shared_low", inst.family == Family::kCorrelatedPair);
  inst.tie_rule = j.value("tie_rule", TieBreakRule{});
  inst.marginals = j.at("marginals").get<std::vector<Dist1D>>();
  inst.rep_bidders = j.value("rep_bidders", std::vector<int>{});
  if (inst.marginals.size() < 2) {
    throw std::invalid_argument("instance: need at least 2 bidders");
  }
  if (inst.high_index >= inst.bidders()) {
    throw std::invalid_argument("instance: high_index out of range");
  }
}

inline void to_json(nlohmann::json& j, const RegretWitness& w) {
  j = {{"bidder", w.bidder},
       {"value", detail::json_num(w.value)},
       {"current_utility", detail::json_num(w.current_utility)},
       {"deviation_bid", detail::json_num(w.deviation_bid)},
       {"regret", detail::json_num(w.regret)}};
}

inline void to_json(nlohmann::json& j, const RegretReport& r) {
  j = {{"passed", r.passed},
       {"delta_target", detail::json_num(r.delta_target)},
       {"max_regret", detail::json_num(r.max_regret)},
       {"mc_std_error", detail::json_num(r.mc_std_error)},
       {"method", r.method},
       {"per_bidder", r.per_bidder}};
}

inline void to_json(nlohmann::json& j, const UniversalApproxReport& r) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& [rule, report] : r.per_rule) {
    rules.push_back({{"rule", rule}, {"report", report}});
  }
  j = {{"passed", r.passed},
       {"delta", detail::json_num(r.delta)},
       {"max_regret", detail::json_num(r.max_regret)},
       {"per_rule", std::move(rules)}};
}

inline void to_json(nlohmann::json& j, const WelfareReport& r) {
  j = {{"family", r.family},
       {"eps", round12(r.eps)},
       {"opt", round12(r.opt)},
       {"fpa", round12(r.fpa)},
       {"ratio", round12(r.ratio)},
       {"bound", round12(r.reference_bound)},
       {"gap", round12(r.gap)},
       {"method", r.method}};
  if (r.mc_std_error) j["stderr"] = round12(*r.mc_std_error);
}

// Welfare table as CSV; the stderr column is empty on closed-form rows.
inline std::string welfare_csv(const std::vector<WelfareReport>& rows) {
  std::string out = "family,eps,opt,fpa,ratio,bound,gap,method,stderr\n";
  for (const WelfareReport& r : rows) {
    out += r.family;
    out += ',' + fmt12(r.eps) + ',' + fmt12(r.opt) + ',' + fmt12(r.fpa) + ',' +
           fmt12(r.ratio) + ',' + fmt12(r.reference_bound) + ',' + fmt12(r.gap) +
           ',' + r.method + ',';
    if (r.mc_std_error) out += fmt12(*r.mc_std_error);
    out += '\n';
  }
  return out;
}

}  // namespace fpa
