#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "invmean/error.hpp"
#include "invmean/generator.hpp"
#include "invmean/measure.hpp"
#include "invmean/parallel.hpp"
#include "invmean/qa.hpp"

namespace invmean {

/// Rule x ↦ f_x on one piece of the index interval.
class GeneratorRule {
 public:
  using Fn = std::function<Generator(double)>;

  GeneratorRule(Fn fn, std::string label) : fn_(std::move(fn)), label_(std::move(label)) {}

  static GeneratorRule constant(Generator g) {
    GeneratorRule rule(nullptr, g.label());
    rule.constant_ = std::move(g);
    return rule;
  }

  /// x ↦ power generator with exponent a x + b on `domain`.
  static GeneratorRule power_sweep(double a, double b, Interval domain) {
    return GeneratorRule([a, b, domain](double x) { return Generator::power(a * x + b, domain); },
                         "power-sweep(" + detail::format_number(a) + ";" + detail::format_number(b) + ")");
  }

  Generator at(double x) const { return constant_ ? *constant_ : fn_(x); }
  bool is_constant() const noexcept { return constant_.has_value(); }
  const std::string& label() const noexcept { return label_; }

  /// x ↦ f_x ∘ u
  GeneratorRule composed_with(const Generator& u) const {
    if (constant_) return constant(compose_with(*constant_, u));
    return GeneratorRule([inner = fn_, u](double x) { return compose_with(inner(x), u); },
                         "composite(" + label_ + ";" + u.label() + ")");
  }

 private:
  std::optional<Generator> constant_;
  Fn fn_;
  std::string label_;
};

/// Piece [lo, hi) of the index interval; the last piece is closed at 1.
struct FamilyPiece {
  double lo = 0.0;
  double hi = 1.0;
  GeneratorRule rule;
};

/// Family (f_x) indexed by x in [0,1], given as finitely many pieces with a
/// continuous rule on each. Every generated function must be defined on the
/// whole family domain.
class AdmissibleFamily {
 public:
  AdmissibleFamily(Interval domain, std::vector<FamilyPiece> pieces)
      : domain_(domain), pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw Error(ErrorKind::InvalidArgument, "family needs at least one piece");
    if (pieces_.front().lo != 0.0 || pieces_.back().hi != 1.0) {
      throw Error(ErrorKind::InvalidArgument, "family pieces must cover [0, 1]");
    }
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const FamilyPiece& piece = pieces_[i];
      if (!(piece.lo < piece.hi)) {
        throw Error(ErrorKind::InvalidArgument, "family piece " + std::to_string(i) + " is empty");
      }
      if (i + 1 < pieces_.size() && piece.hi != pieces_[i + 1].lo) {
        throw Error(ErrorKind::InvalidArgument,
                    "family pieces " + std::to_string(i) + " and " + std::to_string(i + 1) + " are not adjacent");
      }
      for (double x : {piece.lo, piece.lo + (piece.hi - piece.lo) / 2, piece.hi}) {
        const Generator g = piece.rule.at(x);
        if (!g.domain().contains(domain_)) {
          throw Error(ErrorKind::DomainMismatch, "generator " + g.label() + " at x=" + detail::format_number(x) +
                                                     " does not cover the family domain");
        }
        if (piece.rule.is_constant()) break;
      }
    }
  }

  const Interval& domain() const noexcept { return domain_; }
  const std::vector<FamilyPiece>& pieces() const noexcept { return pieces_; }

  std::size_t piece_index(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw Error(ErrorKind::OutOfDomain, "family index " + detail::format_number(x) + " outside [0, 1]");
    }
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      if (x < pieces_[i].hi) return i;
    }
    return pieces_.size() - 1;
  }

  Generator generator_at(double x) const { return pieces_[piece_index(x)].rule.at(x); }

  bool is_finite() const noexcept {
    return std::all_of(pieces_.begin(), pieces_.end(), [](const FamilyPiece& p) { return p.rule.is_constant(); });
  }

 private:
  Interval domain_;
  std::vector<FamilyPiece> pieces_;
};

inline Generator generator_at(const AdmissibleFamily& F, double x) { return F.generator_at(x); }

/// Midpoint discretization of the index measure on [0,1].
struct Discretization {
  std::size_t nodes = 64;
  /// Worker cap for node evaluation; 0 runs sequentially.
  unsigned threads = 0;
};

/// Quadrature nodes of the index interval with their generators.
struct FamilyNodes {
  std::vector<double> x;
  std::vector<double> weight;
  std::vector<Generator> generators;
  /// First node sharing this node's generator (constant pieces are evaluated once).
  std::vector<std::size_t> source;
};

/// Piece-aligned midpoint nodes: piece i of length L_i gets about L_i N nodes
/// (largest-remainder rounding, at least one), each of weight L_i / n_i.
inline FamilyNodes family_nodes(const AdmissibleFamily& F, const Discretization& D) {
  if (D.nodes < 1) throw Error(ErrorKind::InvalidArgument, "discretization needs at least one node");
  const auto& pieces = F.pieces();
  const std::size_t k = pieces.size();
  std::vector<std::size_t> counts(k);
  std::vector<double> remainder(k);
  std::size_t used = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double quota = (pieces[i].hi - pieces[i].lo) * static_cast<double>(D.nodes);
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    remainder[i] = quota - static_cast<double>(counts[i]);
    if (counts[i] == 0) {
      counts[i] = 1;
      remainder[i] = -1.0;
    }
    used += counts[i];
  }
  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t r = 0; used < D.nodes && r < k; ++r, ++used) ++counts[order[r]];

  FamilyNodes nodes;
  for (std::size_t i = 0; i < k; ++i) {
    const FamilyPiece& piece = pieces[i];
    const double len = piece.hi - piece.lo;
    const double w = len / static_cast<double>(counts[i]);
    const std::size_t first = nodes.x.size();
    for (std::size_t j = 0; j < counts[i]; ++j) {
      const double x = piece.lo + (static_cast<double>(j) + 0.5) * w;
      nodes.x.push_back(x);
      nodes.weight.push_back(w);
      if (piece.rule.is_constant() && j > 0) {
        nodes.generators.push_back(nodes.generators[first]);
        nodes.source.push_back(first);
      } else {
        nodes.generators.push_back(piece.rule.at(x));
        nodes.source.push_back(nodes.x.size() - 1);
      }
    }
  }
  return nodes;
}

/// Merge distance for near-coincident output atoms, relative to |I|.
inline constexpr double kMergeRelativeEps = 1e-14;

/// One application of the family operator using precomputed nodes.
inline Measure apply_nodes(const FamilyNodes& nodes, const Interval& domain, const Measure& P,
                           unsigned threads = 0) {
  if (!domain.contains(gamma(P))) {
    throw Error(ErrorKind::DomainMismatch, "support of the measure is not inside the family domain");
  }
  const std::size_t n = nodes.x.size();
  std::vector<double> values(n);
  parallel_for(n, threads, [&](std::size_t j) {
    if (nodes.source[j] == j) values[j] = detail::qa_atoms(nodes.generators[j], P.atoms()).value;
  });
  for (std::size_t j = 0; j < n; ++j) values[j] = values[nodes.source[j]];

  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < n; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  const double eps = kMergeRelativeEps * domain.width();
  std::vector<Atom> atoms;
  atoms.reserve(n);
  std::size_t i = 0;
  while (i < n) {
    const double start = values[order[i]];
    double weight = 0.0;
    double moment = 0.0;
    std::size_t j = i;
    for (; j < n && values[order[j]] - start <= eps; ++j) {
      weight += nodes.weight[order[j]];
      moment += nodes.weight[order[j]] * values[order[j]];
    }
    const double last = values[order[j - 1]];
    const double point = (start == last) ? start : std::clamp(moment / weight, start, last);
    atoms.push_back({point, weight});
    i = j;
  }
  Measure out(std::move(atoms), domain);
  if (out.front() < P.front() || out.back() > P.back()) {
    throw Error(ErrorKind::InvariantViolation, "family image escaped the convex hull of the input support");
  }
  return out;
}

/// Discrete approximation of the family operator: the distribution of
/// x ↦ QA_{f_x}(P) for x uniform on [0,1].
inline Measure apply_family(const AdmissibleFamily& F, const Measure& P, const Discretization& D) {
  return apply_nodes(family_nodes(F, D), F.domain(), P, D.threads);
}

inline Measure iterate_family(const AdmissibleFamily& F, const Measure& P, const Discretization& D,
                              std::size_t n) {
  if (n == 0) return P;
  const FamilyNodes nodes = family_nodes(F, D);
  Measure current = P;
  for (std::size_t i = 0; i < n; ++i) current = apply_nodes(nodes, F.domain(), current, D.threads);
  return current;
}

/// Family (f_x ∘ u) on the domain of u.
inline AdmissibleFamily compose_family(const AdmissibleFamily& F, const Generator& u) {
  const Interval img = u.image();
  const double slack = 1e-12 * (1.0 + std::max(std::fabs(img.lo), std::fabs(img.hi)));
  if (img.lo < F.domain().lo - slack || img.hi > F.domain().hi + slack) {
    throw Error(ErrorKind::DomainMismatch, "image of " + u.label() + " is not inside the family domain");
  }
  std::vector<FamilyPiece> pieces;
  pieces.reserve(F.pieces().size());
  for (const FamilyPiece& p : F.pieces()) pieces.push_back({p.lo, p.hi, p.rule.composed_with(u)});
  return AdmissibleFamily(u.domain(), std::move(pieces));
}

/// Distinct generators of a family whose pieces are all constant.
inline std::vector<Generator> family_generators(const AdmissibleFamily& F) {
  if (!F.is_finite()) {
    throw Error(ErrorKind::InvalidArgument, "family has parameterized pieces; no finite generator set");
  }
  std::vector<Generator> out;
  std::vector<std::string> seen;
  for (const FamilyPiece& p : F.pieces()) {
    if (std::find(seen.begin(), seen.end(), p.rule.label()) != seen.end()) continue;
    seen.push_back(p.rule.label());
    out.push_back(p.rule.at(p.lo));
  }
  return out;
}

}  // namespace invmean
