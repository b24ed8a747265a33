#pragma once

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "invmean/error.hpp"
#include "invmean/family.hpp"
#include "invmean/generator.hpp"
#include "invmean/invariance.hpp"
#include "invmean/measure.hpp"
#include "invmean/separation.hpp"

namespace invmean::io {

using nlohmann::json;

/// 17 significant digits: enough to round-trip any double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] inline void parse_fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ParseError, where + ": " + what);
}

/// Rejects keys outside `allowed` and reports the first missing required key.
inline void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> required,
                       std::initializer_list<std::string_view> optional = {}) {
  if (!j.is_object()) parse_fail(where, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (auto k : required) known = known || key == k;
    for (auto k : optional) known = known || key == k;
    if (!known) parse_fail(where + "." + key, "unknown field");
  }
  for (auto k : required) {
    if (!j.contains(k)) parse_fail(where + "." + std::string(k), "missing required field");
  }
}

inline double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) parse_fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) parse_fail(where, "expected a finite number");
  return v;
}

inline Interval parse_interval(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) parse_fail(where, "expected [lo, hi]");
  const double lo = get_number(j[0], where + "[0]");
  const double hi = get_number(j[1], where + "[1]");
  if (lo > hi) parse_fail(where, "lower end exceeds upper end");
  return Interval{lo, hi};
}

// ---------------------------------------------------------------- measures

/// Strict reader: atoms must already be sorted with weights summing to 1.
inline Measure parse_measure(const json& j, const std::string& where = "measure") {
  check_keys(j, where, {"domain", "atoms"});
  const Interval domain = parse_interval(j["domain"], where + ".domain");
  const json& arr = j["atoms"];
  const std::string at = where + ".atoms";
  if (!arr.is_array() || arr.empty()) parse_fail(at, "expected a nonempty array of [point, weight]");
  std::vector<Atom> atoms;
  double total = 0.0;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string here = at + "[" + std::to_string(i) + "]";
    if (!arr[i].is_array() || arr[i].size() != 2) parse_fail(here, "expected [point, weight]");
    const double x = get_number(arr[i][0], here);
    const double w = get_number(arr[i][1], here);
    if (!(w > 0.0)) parse_fail(here, "weight must be positive");
    if (!domain.contains(x)) parse_fail(here, "point lies outside the domain");
    if (!atoms.empty() && !(x > atoms.back().point)) parse_fail(at, "points must be strictly increasing");
    atoms.push_back({x, w});
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    parse_fail(at, "weights sum to " + format_double(total) + ", expected 1");
  }
  return Measure(std::move(atoms), domain);
}

inline json to_json(const Measure& P) {
  json atoms = json::array();
  for (const Atom& a : P.atoms()) atoms.push_back({a.point, a.weight});
  return json{{"domain", {P.domain().lo, P.domain().hi}}, {"atoms", std::move(atoms)}};
}

// -------------------------------------------------------------- generators

/// Generator spec on `domain`; composite specs give their outer part the image
/// of the inner one, tabulated specs carry their own domain.
inline Generator parse_generator(const json& j, const Interval& domain, const std::string& where = "gen") {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) parse_fail(where + ".kind", "missing kind");
  const std::string kind = j["kind"].get<std::string>();
  try {
    if (kind == "power") {
      check_keys(j, where, {"kind", "p"});
      return Generator::power(get_number(j["p"], where + ".p"), domain);
    }
    if (kind == "log") {
      check_keys(j, where, {"kind"});
      return Generator::log(domain);
    }
    if (kind == "exp") {
      check_keys(j, where, {"kind", "c"});
      return Generator::exp(get_number(j["c"], where + ".c"), domain);
    }
    if (kind == "affine") {
      check_keys(j, where, {"kind", "a", "b"});
      return Generator::affine(get_number(j["a"], where + ".a"), get_number(j["b"], where + ".b"), domain);
    }
    if (kind == "tabulated") {
      check_keys(j, where, {"kind", "knots"});
      const json& arr = j["knots"];
      if (!arr.is_array()) parse_fail(where + ".knots", "expected an array of [t, value]");
      std::vector<std::pair<double, double>> knots;
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string here = where + ".knots[" + std::to_string(i) + "]";
        if (!arr[i].is_array() || arr[i].size() != 2) parse_fail(here, "expected [t, value]");
        knots.emplace_back(get_number(arr[i][0], here), get_number(arr[i][1], here));
      }
      return Generator::tabulated(std::move(knots));
    }
    if (kind == "composite") {
      check_keys(j, where, {"kind", "outer", "inner"});
      const Generator inner = parse_generator(j["inner"], domain, where + ".inner");
      const Generator outer = parse_generator(j["outer"], inner.image(), where + ".outer");
      return Generator::composite(outer, inner);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError) throw;
    parse_fail(where, e.what());
  }
  parse_fail(where + ".kind", "unknown generator kind '" + kind + "'");
}

inline json to_json(const Generator& g) {
  if (const auto* k = g.as<gen::Power>()) return {{"kind", "power"}, {"p", k->p}};
  if (g.as<gen::Log>()) return {{"kind", "log"}};
  if (const auto* k = g.as<gen::Exp>()) return {{"kind", "exp"}, {"c", k->c}};
  if (const auto* k = g.as<gen::Affine>()) return {{"kind", "affine"}, {"a", k->a}, {"b", k->b}};
  if (const auto* k = g.as<gen::Composite>()) {
    return {{"kind", "composite"}, {"outer", to_json(k->outer)}, {"inner", to_json(k->inner)}};
  }
  json knots = json::array();
  for (const auto& [t, v] : g.as<gen::Tabulated>()->knots) knots.push_back({t, v});
  return {{"kind", "tabulated"}, {"knots", std::move(knots)}};
}

// ---------------------------------------------------------------- families

inline GeneratorRule parse_rule(const json& j, const Interval& domain, const std::string& where) {
  if (j.is_object() && j.contains("kind") && j["kind"] == "power-sweep") {
    check_keys(j, where, {"kind", "p_of_x"});
    const json& px = j["p_of_x"];
    const std::string pw = where + ".p_of_x";
    check_keys(px, pw, {"type", "a", "b"});
    if (px["type"] != "affine") parse_fail(pw + ".type", "only affine exponent maps are supported");
    return GeneratorRule::power_sweep(get_number(px["a"], pw + ".a"), get_number(px["b"], pw + ".b"), domain);
  }
  return GeneratorRule::constant(parse_generator(j, domain, where));
}

inline AdmissibleFamily parse_family(const json& j, const std::string& where = "family") {
  check_keys(j, where, {"domain", "pieces"});
  const Interval domain = parse_interval(j["domain"], where + ".domain");
  const json& arr = j["pieces"];
  if (!arr.is_array() || arr.empty()) parse_fail(where + ".pieces", "expected a nonempty array");
  std::vector<FamilyPiece> pieces;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string here = where + ".pieces[" + std::to_string(i) + "]";
    check_keys(arr[i], here, {"span", "gen"});
    const Interval span = parse_interval(arr[i]["span"], here + ".span");
    pieces.push_back({span.lo, span.hi, parse_rule(arr[i]["gen"], domain, here + ".gen")});
  }
  try {
    return AdmissibleFamily(domain, std::move(pieces));
  } catch (const Error& e) {
    parse_fail(where + ".pieces", e.what());
  }
}

// ------------------------------------------------------------------ output

inline void write_trace_csv(std::ostream& os, const IterationTrace& trace) {
  os << "n,gamma_lo,gamma_hi,gap,variance,atoms";
  for (const auto& label : trace.probe_labels) os << ",probe:" << label;
  os << '\n';
  for (const TraceStep& s : trace.steps) {
    os << s.n << ',' << format_double(s.gamma_lo) << ',' << format_double(s.gamma_hi) << ','
       << format_double(s.gap()) << ',' << format_double(s.variance) << ',' << s.atom_count;
    for (double v : s.probes) os << ',' << format_double(v);
    os << '\n';
  }
}

inline std::string json_string(const std::string& s) { return json(s).dump(); }

inline void write_result_json(std::ostream& os, const InvariantResult& r, const IterationTrace& trace) {
  os << "{\n";
  os << "  \"status\": " << json_string(to_string(r.status)) << ",\n";
  os << "  \"k_value\": " << format_double(r.k_value) << ",\n";
  os << "  \"lower\": " << format_double(r.lower) << ",\n";
  os << "  \"upper\": " << format_double(r.upper) << ",\n";
  os << "  \"gap\": " << format_double(r.gap) << ",\n";
  os << "  \"iterations\": " << r.iterations << ",\n";
  os << "  \"probes\": {";
  for (std::size_t k = 0; k < trace.probe_labels.size(); ++k) {
    os << (k ? ", " : "") << json_string(trace.probe_labels[k]) << ": "
       << format_double(trace.steps.back().probes[k]);
  }
  os << "}\n}\n";
}

inline void write_curve_csv(std::ostream& os, const SeparationCurve& curve) {
  os << "t,d\n";
  for (std::size_t i = 0; i < curve.t_grid.size(); ++i) {
    os << format_double(curve.t_grid[i]) << ',' << format_double(curve.values[i]) << '\n';
  }
}

}  // namespace invmean::io
