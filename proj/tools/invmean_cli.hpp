#pragma once

// Subcommand implementations of the invmean tool. Kept apart from main() so
// the exit-code contract can be tested in-process.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "invmean/invmean.hpp"
#include "invmean/io.hpp"

namespace invmean::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNotConverged = 2;

struct ExperimentSpec {
  AdmissibleFamily family;
  Measure measure;
  std::size_t nodes = 64;
  std::optional<double> tol;
  std::size_t max_iter = kDefaultMaxIterations;
  std::vector<Probe> probes;
  std::string trace_path = "trace.csv";
  std::string result_path = "result.json";
};

inline std::size_t parse_count(const json& j, const std::string& where, std::size_t min) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) io::parse_fail(where, "expected an integer");
  const auto v = j.get<long long>();
  if (v < static_cast<long long>(min)) io::parse_fail(where, "must be at least " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

inline ExperimentSpec parse_experiment(const json& j) {
  io::check_keys(j, "spec", {"family", "measure"}, {"nodes", "tol", "max_iter", "probes", "outputs"});
  AdmissibleFamily family = io::parse_family(j["family"], "family");
  Measure measure = io::parse_measure(j["measure"], "measure");
  if (!family.domain().contains(gamma(measure))) {
    io::parse_fail("measure.atoms", "support is not inside family.domain");
  }
  ExperimentSpec spec{std::move(family), std::move(measure), 64, std::nullopt, kDefaultMaxIterations, {}};
  if (j.contains("nodes")) spec.nodes = parse_count(j["nodes"], "nodes", 1);
  if (j.contains("max_iter")) spec.max_iter = parse_count(j["max_iter"], "max_iter", 1);
  if (j.contains("tol")) {
    const double tol = io::get_number(j["tol"], "tol");
    if (!(tol > 0.0)) io::parse_fail("tol", "must be positive");
    spec.tol = tol;
  }
  if (j.contains("probes")) {
    const json& arr = j["probes"];
    if (!arr.is_array()) io::parse_fail("probes", "expected an array of generator specs");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      spec.probes.push_back(
          make_probe(io::parse_generator(arr[i], spec.family.domain(), "probes[" + std::to_string(i) + "]")));
    }
  }
  if (j.contains("outputs")) {
    const json& o = j["outputs"];
    io::check_keys(o, "outputs", {}, {"trace", "result"});
    for (const char* key : {"trace", "result"}) {
      if (o.contains(key) && !o[key].is_string()) io::parse_fail(std::string("outputs.") + key, "expected a path");
    }
    if (o.contains("trace")) spec.trace_path = o["trace"].get<std::string>();
    if (o.contains("result")) spec.result_path = o["result"].get<std::string>();
  }
  return spec;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open spec file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, "spec file '" + path + "' is not valid JSON: " + e.what());
  }
}

inline std::filesystem::path output_path(const std::string& out_dir, const std::string& name) {
  std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  return dir / name;
}

struct IterateOptions {
  std::string spec_path;
  std::string out_dir = ".";
  std::optional<std::size_t> nodes;
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  unsigned threads = 0;
};

/// Runs the family iteration described by a JSON experiment spec and writes
/// the trace CSV and the result JSON.
inline int cmd_iterate(const IterateOptions& opts, std::ostream& out, std::ostream& err) {
  std::optional<ExperimentSpec> spec;
  try {
    spec.emplace(parse_experiment(read_json_file(opts.spec_path)));
    if (opts.nodes) spec->nodes = *opts.nodes;
    if (opts.tol) spec->tol = *opts.tol;
    if (opts.max_iter) spec->max_iter = *opts.max_iter;
    if (spec->nodes < 1) throw Error(ErrorKind::ParseError, "nodes: must be at least 1");
    if (spec->max_iter < 1) throw Error(ErrorKind::ParseError, "max_iter: must be at least 1");
    if (spec->tol && !(*spec->tol > 0.0)) throw Error(ErrorKind::ParseError, "tol: must be positive");
  } catch (const Error& e) {
    err << "invalid spec: " << e.what() << '\n';
    return kExitInvalid;
  }

  const double tol = spec->tol.value_or(default_tolerance(spec->family.domain()));
  const Discretization D{spec->nodes, opts.threads};
  try {
    const auto outcome = run_iteration(spec->family, spec->measure, D, tol, spec->max_iter, spec->probes);
    {
      std::ofstream trace(output_path(opts.out_dir, spec->trace_path));
      io::write_trace_csv(trace, outcome.trace);
    }
    {
      std::ofstream result(output_path(opts.out_dir, spec->result_path));
      io::write_result_json(result, outcome.result, outcome.trace);
    }
    const InvariantResult& r = outcome.result;
    out << "K=" << io::format_double(r.k_value) << " gap=" << io::format_double(r.gap)
        << " status=" << to_string(r.status) << '\n';
    return r.status == Status::Converged ? kExitOk : kExitNotConverged;
  } catch (const Error& e) {
    err << "iteration failed: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "cannot write outputs: " << e.what() << '\n';
    return kExitInvalid;
  }
}

struct SeparationOptions {
  std::string spec_path;
  std::string out_dir = ".";
  std::optional<std::size_t> grid;
  unsigned threads = 0;
};

struct SeparationSpec {
  std::vector<Generator> generators;
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t grid = 64;
  std::string curve_path = "separation.csv";
};

inline constexpr std::size_t kCurvePoints = 100;

/// Either {"domain", "generators"} (a pair or a finite set T) or {"family"}
/// with constant pieces; optional "t_range", "grid", "outputs".
inline SeparationSpec parse_separation(const json& j) {
  io::check_keys(j, "spec", {}, {"domain", "generators", "family", "t_range", "grid", "outputs"});
  SeparationSpec spec;
  Interval domain;
  if (j.contains("family")) {
    if (j.contains("generators") || j.contains("domain")) {
      io::parse_fail("spec", "give either family or domain+generators, not both");
    }
    const AdmissibleFamily family = io::parse_family(j["family"], "family");
    domain = family.domain();
    try {
      spec.generators = family_generators(family);
    } catch (const Error& e) {
      io::parse_fail("family.pieces", e.what());
    }
  } else {
    if (!j.contains("domain")) io::parse_fail("spec.domain", "missing required field");
    if (!j.contains("generators")) io::parse_fail("spec.generators", "missing required field");
    domain = io::parse_interval(j["domain"], "domain");
    const json& arr = j["generators"];
    if (!arr.is_array() || arr.empty()) io::parse_fail("generators", "expected a nonempty array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      spec.generators.push_back(io::parse_generator(arr[i], domain, "generators[" + std::to_string(i) + "]"));
    }
  }
  if (!(domain.width() > 0.0)) io::parse_fail("domain", "must have positive length");
  spec.t_min = domain.width() / static_cast<double>(kCurvePoints);
  spec.t_max = domain.width();
  if (j.contains("t_range")) {
    const Interval tr = io::parse_interval(j["t_range"], "t_range");
    if (!(tr.lo > 0.0) || tr.hi > domain.width()) io::parse_fail("t_range", "must lie inside (0, |domain|]");
    spec.t_min = tr.lo;
    spec.t_max = tr.hi;
  }
  if (j.contains("grid")) spec.grid = parse_count(j["grid"], "grid", 2);
  if (j.contains("outputs")) {
    io::check_keys(j["outputs"], "outputs", {}, {"curve"});
    if (j["outputs"].contains("curve")) {
      if (!j["outputs"]["curve"].is_string()) io::parse_fail("outputs.curve", "expected a path");
      spec.curve_path = j["outputs"]["curve"].get<std::string>();
    }
  }
  return spec;
}

/// t values of the emitted curve: 100 evenly spaced points over [t_min, t_max].
inline std::vector<double> curve_t_values(double t_min, double t_max) {
  std::vector<double> ts;
  if (t_min == t_max) return {t_max};
  for (std::size_t i = 0; i < kCurvePoints; ++i) {
    ts.push_back(i + 1 == kCurvePoints
                     ? t_max
                     : t_min + (t_max - t_min) * static_cast<double>(i) / static_cast<double>(kCurvePoints - 1));
  }
  return ts;
}

inline int cmd_separation(const SeparationOptions& opts, std::ostream& out, std::ostream& err) {
  std::optional<SeparationSpec> spec;
  try {
    spec.emplace(parse_separation(read_json_file(opts.spec_path)));
    if (opts.grid) {
      if (*opts.grid < 2) throw Error(ErrorKind::ParseError, "grid: must be at least 2");
      spec->grid = *opts.grid;
    }
  } catch (const Error& e) {
    err << "invalid spec: " << e.what() << '\n';
    return kExitInvalid;
  }
  try {
    const auto ts = curve_t_values(spec->t_min, spec->t_max);
    const SeparationCurve curve = separation_curve(spec->generators, ts, spec->grid, opts.threads);
    const auto path = output_path(opts.out_dir, spec->curve_path);
    {
      std::ofstream csv(path);
      io::write_curve_csv(csv, curve);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) worst = std::max(worst, curve.values[i] / curve.t_grid[i]);
    out << "rows=" << ts.size() << " max_d_over_t=" << io::format_double(worst) << " curve=" << path.string()
        << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err << "separation failed: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "cannot write outputs: " << e.what() << '\n';
    return kExitInvalid;
  }
}

/// Gauss arithmetic-geometric mean by the scalar a/b recursion.
inline double gauss_agm(double a, double b) {
  for (int i = 0; i < 64 && a != b; ++i) {
    const double next = (a + b) / 2;
    b = std::sqrt(a * b);
    a = next;
  }
  return a;
}

struct DemoAgmOptions {
  double a = 1.0;
  double b = 2.0;
  /// arithmetic/harmonic pair instead of arithmetic/geometric
  bool harmonic = false;
  std::size_t nodes = 64;
  unsigned threads = 0;
};

/// Two-piece family {arithmetic on [0,1/2), geometric on [1/2,1]} applied to
/// the two-point measure at a and b, next to the scalar Gauss AGM.
inline int cmd_demo_agm(const DemoAgmOptions& opts, std::ostream& out, std::ostream& err) {
  if (!(opts.a > 0.0) || !std::isfinite(opts.b) || opts.a > opts.b) {
    err << "demo-agm needs 0 < a <= b\n";
    return kExitInvalid;
  }
  try {
    const Interval I{opts.a, opts.b};
    const double second = opts.harmonic ? -1.0 : 0.0;
    const AdmissibleFamily F(I, {{0.0, 0.5, GeneratorRule::constant(Generator::power(1.0, I))},
                                 {0.5, 1.0, GeneratorRule::constant(Generator::power(second, I))}});
    const Measure P = uniform_atoms({opts.a, opts.b}, I);
    const auto [result, trace] =
        compute_invariant(F, P, Discretization{opts.nodes, opts.threads}, default_tolerance(I));
    const double oracle = opts.harmonic ? std::sqrt(opts.a * opts.b) : gauss_agm(opts.a, opts.b);
    out << "family=" << (opts.harmonic ? "arithmetic-harmonic" : "arithmetic-geometric") << '\n';
    out << "K=" << io::format_double(result.k_value) << '\n';
    out << (opts.harmonic ? "sqrt(ab)=" : "AGM=") << io::format_double(oracle) << '\n';
    out << "diff=" << io::format_double(result.k_value - oracle) << '\n';
    out << "iterations=" << result.iterations << " status=" << to_string(result.status) << '\n';
    return result.status == Status::Converged ? kExitOk : kExitNotConverged;
  } catch (const Error& e) {
    err << "demo-agm failed: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace invmean::cli
