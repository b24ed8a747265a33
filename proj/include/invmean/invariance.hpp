#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "invmean/error.hpp"
#include "invmean/family.hpp"
#include "invmean/generator.hpp"
#include "invmean/measure.hpp"
#include "invmean/qa.hpp"

namespace invmean {

enum class Status { Converged, MaxIterations, Stalled };

inline const char* to_string(Status s) noexcept {
  switch (s) {
    case Status::Converged: return "Converged";
    case Status::MaxIterations: return "MaxIterations";
    case Status::Stalled: return "Stalled";
  }
  return "Unknown";
}

inline constexpr std::size_t kDefaultMaxIterations = 10000;
inline constexpr std::size_t kStallWindow = 50;
inline constexpr double kStallRelativeDecrease = 1e-12;

/// 1e-12 |I|, or 1e-12 for a one-point domain.
inline double default_tolerance(const Interval& domain) noexcept {
  return 1e-12 * (domain.width() > 0.0 ? domain.width() : 1.0);
}

struct Probe {
  std::string label;
  Generator generator;
};

inline Probe make_probe(Generator g) {
  std::string label = g.label();
  return Probe{std::move(label), std::move(g)};
}

struct TraceStep {
  std::size_t n = 0;
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;
  double variance = 0.0;
  std::size_t atom_count = 0;
  std::vector<double> probes;

  double gap() const noexcept { return gamma_hi - gamma_lo; }
};

struct IterationTrace {
  std::vector<std::string> probe_labels;
  std::vector<TraceStep> steps;
};

/// Finite-truncation estimate of the lower and upper invariant means.
struct InvariantResult {
  double lower = 0.0;
  double upper = 0.0;
  double k_value = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  Status status = Status::MaxIterations;
};

struct IterationOutcome {
  InvariantResult result;
  IterationTrace trace;
  /// Last iterate.
  Measure final_measure;
};

/// Iterates the family operator from P until the support hull is narrower
/// than tol, max_iter steps have been taken, or the hull width has failed to
/// shrink by a relative 1e-12 over 50 consecutive steps.
///
/// The hull endpoints at step n bracket every invariant mean evaluated at P,
/// so [lower, upper] is the envelope and gap its certificate.
inline IterationOutcome run_iteration(const AdmissibleFamily& F, const Measure& P, const Discretization& D,
                                      double tol, std::size_t max_iter, const std::vector<Probe>& probes = {}) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be at least 1");
  if (!F.domain().contains(gamma(P))) {
    throw Error(ErrorKind::DomainMismatch, "support of the measure is not inside the family domain");
  }
  for (const Probe& pr : probes) {
    if (!pr.generator.domain().contains(F.domain())) {
      throw Error(ErrorKind::DomainMismatch, "probe " + pr.label + " does not cover the family domain");
    }
  }

  const FamilyNodes nodes = family_nodes(F, D);
  IterationTrace trace;
  for (const Probe& pr : probes) trace.probe_labels.push_back(pr.label);

  auto record = [&](std::size_t n, const Measure& Q) {
    TraceStep step;
    step.n = n;
    step.gamma_lo = Q.front();
    step.gamma_hi = Q.back();
    step.variance = mean_and_variance(Q).variance;
    step.atom_count = Q.size();
    step.probes.reserve(probes.size());
    for (const Probe& pr : probes) step.probes.push_back(qa_mean(pr.generator, Q).value);
    if (!trace.steps.empty()) {
      const TraceStep& prev = trace.steps.back();
      if (step.gamma_lo < prev.gamma_lo || step.gamma_hi > prev.gamma_hi) {
        throw Error(ErrorKind::InvariantViolation, "support hulls are not nested at step " + std::to_string(n));
      }
    }
    trace.steps.push_back(std::move(step));
  };

  Measure current = P;
  record(0, current);
  Status status = Status::MaxIterations;
  std::size_t n = 0;
  std::size_t stalled = 0;
  while (true) {
    const double width = current.back() - current.front();
    if (width < tol) {
      status = Status::Converged;
      break;
    }
    if (n >= max_iter) {
      status = Status::MaxIterations;
      break;
    }
    if (stalled >= kStallWindow) {
      status = Status::Stalled;
      break;
    }
    current = apply_nodes(nodes, F.domain(), current, D.threads);
    ++n;
    record(n, current);
    const double next = current.back() - current.front();
    stalled = (next > (1.0 - kStallRelativeDecrease) * width) ? stalled + 1 : 0;
  }

  InvariantResult result;
  result.lower = current.front();
  result.upper = current.back();
  result.gap = result.upper - result.lower;
  result.k_value = result.lower + result.gap / 2;
  result.iterations = n;
  result.status = status;
  return {result, std::move(trace), std::move(current)};
}

inline std::pair<InvariantResult, IterationTrace> compute_invariant(const AdmissibleFamily& F, const Measure& P,
                                                                    const Discretization& D, double tol,
                                                                    std::size_t max_iter = kDefaultMaxIterations) {
  auto out = run_iteration(F, P, D, tol, max_iter);
  return {out.result, std::move(out.trace)};
}

struct ProbeReport {
  InvariantResult result;
  IterationTrace trace;
  std::vector<std::string> labels;
  /// sequences[k][n] = QA_k(P_n)
  std::vector<std::vector<double>> sequences;
  std::vector<double> finals;
  /// All final probe values within 10 tol of each other.
  bool agree = false;
};

/// Tracks QA_k(P_n) for every probe k; all of them should tend to K_F(P).
inline ProbeReport probe_convergence(const AdmissibleFamily& F, const Measure& P, const Discretization& D,
                                     const std::vector<Probe>& probes, double tol,
                                     std::size_t max_iter = kDefaultMaxIterations) {
  auto out = run_iteration(F, P, D, tol, max_iter, probes);
  ProbeReport report;
  report.result = out.result;
  report.labels = out.trace.probe_labels;
  report.sequences.resize(probes.size());
  for (const TraceStep& step : out.trace.steps) {
    for (std::size_t k = 0; k < probes.size(); ++k) report.sequences[k].push_back(step.probes[k]);
  }
  for (const auto& seq : report.sequences) report.finals.push_back(seq.back());
  report.agree = true;
  for (double a : report.finals) {
    for (double b : report.finals) {
      if (std::fabs(a - b) > 10.0 * tol) report.agree = false;
    }
  }
  report.trace = std::move(out.trace);
  return report;
}

inline std::vector<double> variance_decay(const IterationTrace& trace) {
  if (trace.steps.empty()) throw Error(ErrorKind::InvalidArgument, "empty iteration trace");
  std::vector<double> out;
  out.reserve(trace.steps.size());
  for (const TraceStep& s : trace.steps) out.push_back(s.variance);
  return out;
}

struct ConjugacyCheck {
  /// K_G(P) computed directly on the composed family.
  double direct = 0.0;
  /// u^{-1}(K_F(u_*P)).
  double transported = 0.0;
  bool agree = false;
};

/// Computes the invariant mean of G = (f_x ∘ u) at P both directly and by
/// transporting P through u, iterating with F, and pulling the result back.
inline ConjugacyCheck conjugacy_check(const AdmissibleFamily& F, const Generator& u, const Measure& P,
                                      const Discretization& D, double tol) {
  const AdmissibleFamily G = compose_family(F, u);
  const Measure pushed = pushforward(u, P);
  const auto direct = run_iteration(G, P, D, default_tolerance(G.domain()), kDefaultMaxIterations);
  const auto image = run_iteration(F, pushed, D, default_tolerance(F.domain()), kDefaultMaxIterations);
  const Interval img = u.image();
  ConjugacyCheck check;
  check.direct = direct.result.k_value;
  check.transported = u.inverse_value(std::clamp(image.result.k_value, img.lo, img.hi));
  check.agree = std::fabs(check.direct - check.transported) <= tol;
  return check;
}

inline bool check_conjugacy_equivalence(const AdmissibleFamily& F, const Generator& u, const Measure& P,
                                        const Discretization& D, double tol) {
  return conjugacy_check(F, u, P, D, tol).agree;
}

}  // namespace invmean
