#pragma once

#include <cstddef>
#include <vector>

#include "invmean/family.hpp"
#include "invmean/invariance.hpp"
#include "invmean/separation.hpp"

namespace invmean {

/// Uniqueness workflow for a family built from finitely many generators:
/// every member is then bounded by members of the finite set, so the hull
/// width contracts at least as fast as the pairwise separation function.
struct UniquenessCertificate {
  std::vector<Generator> bounding_set;
  std::size_t predicted_iterations = 0;
  InvariantResult result;
  /// Converged with gap < tol.
  bool unique_at_tolerance = false;
  bool prediction_holds = false;
};

inline UniquenessCertificate certify_finite_family(const AdmissibleFamily& F, const Measure& P,
                                                   const Discretization& D, double tol, std::size_t grid = 64) {
  UniquenessCertificate cert;
  cert.bounding_set = family_generators(F);
  const double t0 = P.back() - P.front();
  cert.predicted_iterations = t0 > 0.0 ? predict_iterations(cert.bounding_set, t0, tol, grid, D.threads) : 0;
  cert.result = compute_invariant(F, P, D, tol).first;
  cert.unique_at_tolerance = cert.result.status == Status::Converged && cert.result.gap < tol;
  cert.prediction_holds = cert.result.iterations <= cert.predicted_iterations;
  return cert;
}

}  // namespace invmean
