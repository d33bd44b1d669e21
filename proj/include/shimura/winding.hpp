#pragma once

#include <string>
#include <utility>
#include <vector>

#include "shimura/graph.hpp"

namespace shimura {

/// Denominator attached to an edge of width w when weighting embedding
/// counts: kAutomorphism divides by |Aut(R^x/±1)| (1, 1, 2 for w = 1, 2, 3),
/// kWidth divides by w itself. The automorphism normalization is the one
/// under which the degree-4/28/36/267 combination below closes up.
enum class GrossNorm { kAutomorphism, kWidth };

/// Rational edge vector attached to the quadratic order of discriminant -d:
/// the coefficient at an edge counts the optimal embeddings of the order into
/// the edge's endomorphism order, divided by the normalization factor.
struct GrossVector {
  Int d = 0;              // positive; the quadratic order has discriminant -d
  bool supported = true;  // false: a splitting precondition failed
  std::string reason;     // why the vector is zero, when unsupported
  GrossNorm norm = GrossNorm::kAutomorphism;
  std::vector<Rat> coeff;   // per full-graph edge
  std::vector<Rat> pushed;  // per quotient edge, filled once pushed
};

/// The vector is zero with `supported = false` when -d is a square mod q (the
/// order does not embed in the algebra) or p is inert in the order (no edge
/// supports an embedding). Anything else wrong with d is an error.
GrossVector gross_vector(const DualGraph& g, const std::vector<Order>& edge_ords,
                         const Int& d, GrossNorm norm = GrossNorm::kAutomorphism);

/// Boundary divisor sum coeff * ([target] - [source]) over the 2h vertices of
/// the full graph; zero exactly on cycles.
std::vector<Rat> boundary(const DualGraph& g, const std::vector<Rat>& coeff);

/// Boundary on the quotient graph, over its 2 * orbit_count() vertices.
std::vector<Rat> boundary(const QuotientGraph& qg, const std::vector<Rat>& coeff);

/// Sum of the coefficients over each involution edge orbit. Commutes with the
/// boundary through the class-orbit identification of vertices.
std::vector<Rat> pushforward(const QuotientGraph& qg, const std::vector<Rat>& coeff);

/// The vector 1/w(C_j) over the ideal classes. Brandt matrices act on it with
/// eigenvalue n + 1; its weight is (q - 1)/12 exactly.
struct EisensteinVector {
  std::vector<Rat> entry;
  Rat weight;
};
EisensteinVector eisenstein_vector(const ClassSet& cs);

/// An integer combination of pushed Gross vectors with boundary zero and a
/// prescribed unit condition mod p at one edge. Edge coefficients are the
/// combination scaled by 6, which clears every width denominator.
struct CyclePath {
  bool found = false;
  std::string note;             // failure reason when not found
  std::vector<Int> lambda;      // per input vector
  std::vector<Int> edge_coeff;  // per quotient edge, 6-scaled
  Int exceptional_coeff = 0;    // 6-scaled coefficient at the chosen edge
  bool boundary_zero = false;
  bool unit_mod_p = false;
};

/// Kernel of the quotient boundary restricted to the span of the given
/// vectors, scanned for an element whose coefficient at `exceptional_edge` is
/// prime to p. Unsupported or empty inputs give a clean failure verdict.
CyclePath find_cycle_combination(const DualGraph& g, const QuotientGraph& qg,
                                 std::vector<GrossVector>& vecs,
                                 size_t exceptional_edge);

/// Support connectivity of a cycle and the splitting data that shaped it.
struct CycleShape {
  size_t components = 0;
  std::vector<std::pair<Int, int>> splitting;  // (d, kronecker(-d, p))
};
CycleShape cycle_shape_report(const QuotientGraph& qg, const CyclePath& path,
                              const std::vector<GrossVector>& vecs);

/// Discriminants d <= d_max whose order embeds in the algebra (-d inert at
/// q), is not inert at p, and has class number at most h_bound.
std::vector<Int> suggest_discriminants(const Int& q, const Int& p,
                                       const Int& h_bound, const Int& d_max);

std::string gross_to_json(const DualGraph& g, const GrossVector& v);
std::string cycle_to_json(const std::vector<GrossVector>& vecs, const CyclePath& path);

}  // namespace shimura
