#pragma once

#include <utility>
#include <vector>

#include "shimura/graph.hpp"
#include "shimura/linalg.hpp"

namespace shimura {

/// Oriented incidence data of a width-free graph. d_upper_star sends a vertex
/// potential to its per-edge drops, d_star is the transpose boundary map, and
/// iota = -d_star * d_upper_star is the negated multigraph Laplacian: zero row
/// sums, off-diagonal entries the edge multiplicities.
struct BoundaryMaps {
  ZMat d_star;        // vertices x edges
  ZMat d_upper_star;  // edges x vertices
  ZMat iota;          // vertices x vertices
};

BoundaryMaps laplacian(size_t vertices,
                       const std::vector<std::pair<size_t, size_t>>& edges);
BoundaryMaps laplacian(const ResolvedGraph& g);
/// Rejects any width above one: resolve the graph first.
BoundaryMaps laplacian(const QuotientGraph& g);

/// Cokernel of iota on the degree-zero part, with the Smith transforms
/// retained so membership in the image stays queryable.
struct ComponentGroup {
  size_t vertices;
  size_t components;                   // n - rank(iota)
  size_t free_rank;                    // components - 1, zero iff connected
  std::vector<Int> invariant_factors;  // torsion factors above 1
  Int order;                           // torsion order; spanning-tree count
  SnfResult smith;
};

ComponentGroup component_group(const ZMat& iota);

/// True iff n * (e_{c1} - e_{c2}) lies in the integer column span of iota,
/// i.e. the class of c1 - c2 is killed by n.
bool is_killed_by(const ComponentGroup& cg, const Int& n, size_t c1,
                  size_t c2);

/// Flow law data: current i with zero total, candidate potential v. The law
/// asks that at every vertex the potential drops toward it sum to i there.
struct FlowProblem {
  ZVec current;
  ZVec potential;
};

struct FlowReport {
  bool ok;
  ZVec residuals;  // per-vertex defect of the flow law
};

FlowReport verify_flow(const FlowProblem& fp, const BoundaryMaps& bm);

/// Hypothesis screen for contracting everything but the base component p0
/// into a smooth model.
struct SmoothModelReport {
  bool base_assumed;           // the choice of p0 is a modeling input
  bool two_nondisconnecting;   // p0 meets the rest in exactly two non-bridges
  bool degree_below_gonality;  // 245 n < p q, conditional on the gonality bound
  bool torsion_clear;          // n(C - p0) escapes im(iota) for all C != p0
  std::vector<size_t> torsion_failures;
};

SmoothModelReport smooth_model_hypotheses(const ResolvedGraph& g,
                                          const ComponentGroup& cg, size_t p0,
                                          const Int& n, const Int& p,
                                          const Int& q);

}  // namespace shimura
