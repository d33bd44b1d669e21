#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "shimura/arith.hpp"
#include "shimura/quaternion.hpp"

namespace shimura {

/// Edge of the special-fiber dual graph: a unit orbit of kernel lines at its
/// source class. lines[0] is the canonical representative of the orbit.
struct GraphEdge {
  size_t src;
  size_t tgt;
  int width;  // stabilizer order of the orbit in R^x/±1
  std::vector<std::pair<u64, u64>> lines;
  Ideal kernel;       // kernel ideal of lines[0], left ideal of R_src
  Transporter trans;  // I_src * kernel = I_tgt * trans
};

/// Dual graph of the level-pq special fiber at p: two copies of the maximal
/// ideal classes joined by the level-p edge classes. Vertex id = copy*h() +
/// class, with every source in copy 0 and every target in copy 1.
struct DualGraph {
  Algebra alg;
  Int p;
  u64 seed;
  ClassSet classes;
  std::vector<SplitMap> splits;  // R_j mod p, per class
  std::vector<GraphEdge> edges;
  std::vector<std::map<std::pair<u64, u64>, size_t>> edge_at;  // line -> edge
  std::vector<size_t> sigma;             // class action of the norm-q ideal
  std::vector<Ideal> twosided;           // the norm-q ideal of R_j
  std::vector<Transporter> sigma_trans;  // I_j * twosided[j] = I_sigma[j] * t

  size_t h() const { return classes.cls.size(); }
  size_t vertex_count() const { return 2 * h(); }
};

/// p and q distinct odd primes, q ≡ 3 mod 4, p not ramified.
DualGraph build_graph(const Int& p, const Int& q, u64 seed = 1);

/// An involution as graph permutations. edge_sign is -1 exactly on edges
/// mapped to themselves with their endpoints swapped.
struct ALAction {
  Int ell;
  bool swaps_copies;
  std::vector<size_t> vertex_perm;
  std::vector<size_t> edge_perm;
  std::vector<int> edge_sign;
};

/// The involution attached to ell in {p, q}. Failure of the involution or
/// equivariance identities is a hard error.
ALAction atkin_lehner(const DualGraph& g, const Int& ell);

/// Quotient by the copy-preserving involution: vertices are (copy, class
/// orbit), edges are unordered edge orbits, which all have size 2 in the
/// supported case.
struct QuotientEdge {
  std::vector<size_t> orbit;  // full-graph edge ids
  size_t src;                 // class-orbit index of the copy-0 endpoint
  size_t tgt;                 // class-orbit index of the copy-1 endpoint
  int width;
};

struct QuotientGraph {
  Int p;
  std::vector<std::vector<size_t>> class_orbits;
  std::vector<size_t> orbit_of;  // class -> orbit
  std::vector<int> orbit_w;
  std::vector<QuotientEdge> edges;
  std::vector<size_t> qedge_of;  // full edge -> quotient edge

  size_t orbit_count() const { return class_orbits.size(); }
  size_t vertex_count() const { return 2 * orbit_count(); }
  size_t vertex_id(int copy, size_t orbit) const {
    return copy * orbit_count() + orbit;
  }
};

/// Requires the copy-preserving action. An edge fixed by it (the ramified
/// configuration) throws UnsupportedCase.
QuotientGraph quotient_by(const DualGraph& g, const ALAction& a);

/// Width-free resolution: every width-e edge becomes a chain of e unit edges
/// through e-1 new vertices. Original vertex ids are preserved.
struct ResolvedGraph {
  size_t vertices;
  std::vector<std::pair<size_t, size_t>> edges;
  std::vector<size_t> parent;            // per edge, the quotient edge id
  std::vector<long long> vertex_parent;  // spawning quotient edge, -1 if old
};

ResolvedGraph desingularize(const QuotientGraph& q);

struct GraphShape {
  size_t components;
  size_t h1;  // E - V + components
};

GraphShape graph_shape(size_t vertices,
                       const std::vector<std::pair<size_t, size_t>>& edges);

std::vector<std::pair<size_t, size_t>> edge_endpoints(const DualGraph& g);
std::vector<std::pair<size_t, size_t>> edge_endpoints(const QuotientGraph& q);

/// Bridges and cut vertices, for the non-disconnecting checks.
struct CutReport {
  bool connected;
  std::vector<size_t> bridges;
  std::vector<size_t> cut_vertices;
};

CutReport cut_report(size_t vertices,
                     const std::vector<std::pair<size_t, size_t>>& edges);

/// The rational exceptional component: the vertex resolving the unique
/// width-2 quotient edge whose full-graph orbit is preserved by the level-p
/// involution with reversed orientation.
struct ExceptionalComponent {
  size_t vertex;  // in the resolved graph
  size_t qedge;
  std::array<size_t, 2> incident;  // resolved edge ids at the vertex
  bool non_disconnecting;          // neither incident edge is a bridge
};

/// Throws UnsupportedCase unless p ≡ 1 mod 4, q ≡ 3 mod 4 and (q|p) = -1.
/// Zero or several candidates is a hard error.
ExceptionalComponent exceptional_component(const DualGraph& g,
                                           const ALAction& wp,
                                           const QuotientGraph& qg,
                                           const ResolvedGraph& rg);

/// Deviations of the edge counts from their Eisenstein main terms, for the
/// full graph and the quotient, plus the per-vertex quotient degree law with
/// the realized sign in the order-6 case.
struct DegreeCheck {
  size_t orbit;
  int copy;
  int case_id;  // 1 quadratic pair, 2 rational w=1, 3 w=2, 4 w=3
  int sign;     // ±1 in case 4, else 0
  Int expected;
  Int actual;
  bool ok;
};

struct EquidistReport {
  Rat eis_weight;                     // Σ 1/w over classes
  std::vector<std::vector<Rat>> dev;  // class x class, count minus main term
  double max_norm_dev;                // max |dev| / sqrt(p)
  std::vector<std::vector<Rat>> dev_quot;  // orbit x orbit
  double max_norm_dev_quot;
  bool degree_law_applies;  // the supported congruence pattern holds
  std::vector<DegreeCheck> degrees;
  bool degrees_ok;
};

EquidistReport equidistribution_report(const DualGraph& g,
                                       const QuotientGraph& qg);

/// j-invariants per class, matched through the degree-2 and degree-3 isogeny
/// structure. Galois ambiguity is reported, never silently resolved; the
/// returned labeling is the first in a deterministic search order.
struct JLabels {
  std::vector<Fq2> j;
  size_t solutions;  // number of consistent matchings found (capped)
  bool ambiguous;
};

JLabels label_vertices_by_j(const DualGraph& g, const SsPoly& ss);

/// Classical degree-2 and degree-3 modular relations as monic polynomials in
/// the second variable, the first evaluated at x.
PolyQ2 isogeny_relation2(const Fq2Ctx& F, Fq2 x);
PolyQ2 isogeny_relation3(const Fq2Ctx& F, Fq2 x);

/// Level-pq order of an edge: the intersection of the two maximal orders its
/// kernel ideal connects. Unit group size is checked against the edge width.
Order edge_order(const DualGraph& g, size_t edge);
std::vector<Order> edge_orders(const DualGraph& g);

std::string graph_to_dot(const DualGraph& g, const JLabels* labels = nullptr);
std::string graph_to_json(const DualGraph& g, const JLabels* labels = nullptr);

}  // namespace shimura
