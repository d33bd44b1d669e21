#include "shimura/component_group.hpp"

#include <algorithm>
#include <stdexcept>

namespace shimura {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("component group: " + msg);
}

void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

ZVec col_mul(const ZMat& a, const ZVec& x) {
  ZVec out(a.size(), 0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < x.size(); ++j) out[i] += a[i][j] * x[j];
  return out;
}

}  // namespace

BoundaryMaps laplacian(size_t vertices,
                       const std::vector<std::pair<size_t, size_t>>& edges) {
  BoundaryMaps bm;
  bm.d_upper_star.assign(edges.size(), ZVec(vertices, 0));
  bm.d_star.assign(vertices, ZVec(edges.size(), 0));
  bm.iota = zmat(vertices, vertices);
  for (size_t e = 0; e < edges.size(); ++e) {
    auto [u, v] = edges[e];
    require(u < vertices && v < vertices, "edge endpoint out of range");
    if (u == v) continue;
    bm.d_upper_star[e][v] += 1;
    bm.d_upper_star[e][u] -= 1;
    bm.d_star[v][e] += 1;
    bm.d_star[u][e] -= 1;
    bm.iota[u][u] -= 1;
    bm.iota[v][v] -= 1;
    bm.iota[u][v] += 1;
    bm.iota[v][u] += 1;
  }
  return bm;
}

BoundaryMaps laplacian(const ResolvedGraph& g) {
  return laplacian(g.vertices, g.edges);
}

BoundaryMaps laplacian(const QuotientGraph& g) {
  for (const auto& e : g.edges)
    if (e.width != 1) fail("width above one, desingularize first");
  return laplacian(g.vertex_count(), edge_endpoints(g));
}

ComponentGroup component_group(const ZMat& iota) {
  size_t n = iota.size();
  require(n > 0, "empty matrix");
  for (size_t i = 0; i < n; ++i) {
    require(iota[i].size() == n, "matrix not square");
    Int row = 0;
    for (size_t j = 0; j < n; ++j) {
      require(iota[i][j] == iota[j][i], "matrix not symmetric");
      row += iota[i][j];
    }
    require(row == 0, "row sum not zero");
  }

  ComponentGroup cg;
  cg.vertices = n;
  cg.smith = snf(iota);
  cg.components = n - cg.smith.rank;
  require(cg.components >= 1, "rank exceeds size");
  cg.free_rank = cg.components - 1;
  cg.order = 1;
  for (const Int& d : cg.smith.invariants) {
    cg.order *= d;
    if (d > 1) cg.invariant_factors.push_back(d);
  }
  return cg;
}

bool is_killed_by(const ComponentGroup& cg, const Int& n, size_t c1,
                  size_t c2) {
  require(n > 0, "torsion bound must be positive");
  require(c1 < cg.vertices && c2 < cg.vertices, "vertex out of range");
  require(c1 != c2, "vertices must differ");
  ZVec x(cg.vertices, 0);
  x[c1] = n;
  x[c2] = -n;
  ZVec w = col_mul(cg.smith.u, x);
  for (size_t i = 0; i < cg.vertices; ++i) {
    if (i < cg.smith.rank) {
      if (w[i] % cg.smith.d[i][i] != 0) return false;
    } else if (w[i] != 0) {
      return false;
    }
  }
  return true;
}

FlowReport verify_flow(const FlowProblem& fp, const BoundaryMaps& bm) {
  size_t n = bm.iota.size();
  require(fp.current.size() == n && fp.potential.size() == n,
          "flow data size mismatch");
  Int total = 0;
  for (const Int& c : fp.current) total += c;
  require(total == 0, "current does not sum to zero");

  FlowReport rep;
  rep.ok = true;
  rep.residuals.assign(n, 0);
  ZVec drop = col_mul(bm.iota, fp.potential);
  for (size_t i = 0; i < n; ++i) {
    rep.residuals[i] = -drop[i] - fp.current[i];
    if (rep.residuals[i] != 0) rep.ok = false;
  }
  return rep;
}

SmoothModelReport smooth_model_hypotheses(const ResolvedGraph& g,
                                          const ComponentGroup& cg, size_t p0,
                                          const Int& n, const Int& p,
                                          const Int& q) {
  require(cg.vertices == g.vertices, "group and graph sizes differ");
  require(p0 < g.vertices, "base component out of range");
  require(n > 0, "multiplier must be positive");

  SmoothModelReport rep;
  rep.base_assumed = true;

  std::vector<size_t> inc;
  for (size_t e = 0; e < g.edges.size(); ++e)
    if (g.edges[e].first == p0 || g.edges[e].second == p0) inc.push_back(e);
  CutReport cr = cut_report(g.vertices, g.edges);
  rep.two_nondisconnecting = inc.size() == 2;
  for (size_t e : inc)
    if (std::count(cr.bridges.begin(), cr.bridges.end(), e))
      rep.two_nondisconnecting = false;

  rep.degree_below_gonality = 245 * n < p * q;

  rep.torsion_clear = true;
  for (size_t c = 0; c < g.vertices; ++c) {
    if (c == p0) continue;
    if (is_killed_by(cg, n, c, p0)) {
      rep.torsion_clear = false;
      rep.torsion_failures.push_back(c);
    }
  }
  return rep;
}

}  // namespace shimura
