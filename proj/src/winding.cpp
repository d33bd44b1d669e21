#include "shimura/winding.hpp"

#include <functional>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "shimura/arith.hpp"
#include "shimura/intmath.hpp"

namespace shimura {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("winding: " + msg); }

void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

Int norm_denominator(int width, GrossNorm norm) {
  if (norm == GrossNorm::kWidth) return Int(width);
  return Int(width == 3 ? 2 : 1);  // |Aut(Z/w)| for w = 1, 2, 3
}

bool is_integral(const Rat& r) { return boost::multiprecision::denominator(r) == 1; }

Int rat_floor_num(const Rat& r) { return boost::multiprecision::numerator(r); }

}  // namespace

GrossVector gross_vector(const DualGraph& g, const std::vector<Order>& edge_ords,
                         const Int& d, GrossNorm norm) {
  require(edge_ords.size() == g.edges.size(), "edge order table does not match the graph");
  QuadDisc qd = quad_disc(d);
  GrossVector v;
  v.d = d;
  v.norm = norm;
  v.coeff.assign(g.edges.size(), Rat(0));
  if (kronecker(-d, g.alg.q) == 1) {
    v.supported = false;
    v.reason = "the order does not embed: -" + d.str() + " is a square mod q";
    return v;
  }
  if (kronecker(-d, g.p) == -1) {
    v.supported = false;
    v.reason = "p is inert in the order of discriminant -" + d.str();
    return v;
  }
  for (size_t e = 0; e < g.edges.size(); ++e) {
    Int h = optimal_embedding_count(g.alg, edge_ords[e], qd);
    if (h == 0) continue;
    v.coeff[e] = Rat(h, norm_denominator(g.edges[e].width, norm));
  }
  return v;
}

std::vector<Rat> boundary(const DualGraph& g, const std::vector<Rat>& coeff) {
  require(coeff.size() == g.edges.size(), "edge vector does not match the graph");
  std::vector<Rat> div(g.vertex_count(), Rat(0));
  for (size_t e = 0; e < coeff.size(); ++e) {
    if (coeff[e] == 0) continue;
    div[g.h() + g.edges[e].tgt] += coeff[e];
    div[g.edges[e].src] -= coeff[e];
  }
  return div;
}

std::vector<Rat> boundary(const QuotientGraph& qg, const std::vector<Rat>& coeff) {
  require(coeff.size() == qg.edges.size(), "edge vector does not match the quotient graph");
  std::vector<Rat> div(qg.vertex_count(), Rat(0));
  for (size_t e = 0; e < coeff.size(); ++e) {
    if (coeff[e] == 0) continue;
    div[qg.vertex_id(1, qg.edges[e].tgt)] += coeff[e];
    div[qg.vertex_id(0, qg.edges[e].src)] -= coeff[e];
  }
  return div;
}

std::vector<Rat> pushforward(const QuotientGraph& qg, const std::vector<Rat>& coeff) {
  require(coeff.size() == qg.qedge_of.size(), "edge vector does not match the full graph");
  std::vector<Rat> out(qg.edges.size(), Rat(0));
  for (size_t e = 0; e < coeff.size(); ++e) out[qg.qedge_of[e]] += coeff[e];
  return out;
}

EisensteinVector eisenstein_vector(const ClassSet& cs) {
  require(cs.level == 1, "the Eisenstein vector lives on the maximal level");
  Int q = cs.base.disc;
  require(q > 3, "q must exceed 3");
  EisensteinVector eis;
  eis.weight = Rat(0);
  for (const auto& c : cs.cls) {
    eis.entry.push_back(Rat(1, c.w));
    eis.weight += Rat(1, c.w);
  }
  require(eis.weight == Rat(q - 1, 12), "Eisenstein weight is off the mass formula");
  return eis;
}

CyclePath find_cycle_combination(const DualGraph& g, const QuotientGraph& qg,
                                 std::vector<GrossVector>& vecs, size_t exceptional_edge) {
  CyclePath out;
  if (vecs.empty()) {
    out.note = "empty discriminant list";
    return out;
  }
  for (const auto& v : vecs)
    if (!v.supported) {
      out.note = "no vector for discriminant -" + v.d.str() + ": " + v.reason;
      return out;
    }
  require(exceptional_edge < qg.edges.size(), "exceptional edge out of range");

  size_t k = vecs.size();
  size_t ne = qg.edges.size();
  ZMat cleared(k, ZVec(ne, Int(0)));  // 6-scaled pushforwards
  ZMat bnd(k, ZVec(qg.vertex_count(), Int(0)));
  for (size_t i = 0; i < k; ++i) {
    if (vecs[i].pushed.empty()) vecs[i].pushed = pushforward(qg, vecs[i].coeff);
    for (size_t e = 0; e < ne; ++e) {
      Rat c = vecs[i].pushed[e] * 6;
      require(is_integral(c), "width denominators do not clear at 6");
      cleared[i][e] = rat_floor_num(c);
      bnd[i][qg.vertex_id(1, qg.edges[e].tgt)] += cleared[i][e];
      bnd[i][qg.vertex_id(0, qg.edges[e].src)] -= cleared[i][e];
    }
  }

  ZMat kernel = left_kernel(bnd);
  if (kernel.empty()) {
    out.note = "the span contains no cycle";
    return out;
  }

  // candidate multipliers: kernel basis rows, then pairwise sums/differences
  std::vector<ZVec> candidates;
  for (const auto& r : kernel) candidates.push_back(r);
  for (size_t a = 0; a < kernel.size(); ++a)
    for (size_t b = a + 1; b < kernel.size(); ++b) {
      ZVec s(k), d(k);
      for (size_t i = 0; i < k; ++i) {
        s[i] = kernel[a][i] + kernel[b][i];
        d[i] = kernel[a][i] - kernel[b][i];
      }
      candidates.push_back(s);
      candidates.push_back(d);
    }

  for (auto& lam : candidates) {
    for (size_t i = 0; i < k; ++i) {
      if (lam[i] == 0) continue;
      if (lam[i] < 0)
        for (auto& x : lam) x = -x;
      break;
    }
    ZVec edge(ne, Int(0));
    for (size_t i = 0; i < k; ++i)
      for (size_t e = 0; e < ne; ++e) edge[e] += lam[i] * cleared[i][e];
    Int exc = edge[exceptional_edge];
    if (exc % g.p == 0) continue;

    std::vector<Rat> as_rat(edge.begin(), edge.end());
    std::vector<Rat> div = boundary(qg, as_rat);
    for (const auto& x : div) require(x == 0, "cycle boundary verification failed");

    out.found = true;
    out.lambda = lam;
    out.edge_coeff = std::move(edge);
    out.exceptional_coeff = exc;
    out.boundary_zero = true;
    out.unit_mod_p = true;
    return out;
  }
  out.note = "no combination is a unit mod p at the exceptional edge";
  return out;
}

CycleShape cycle_shape_report(const QuotientGraph& qg, const CyclePath& path,
                              const std::vector<GrossVector>& vecs) {
  require(path.found, "shape report needs a found cycle");
  require(path.edge_coeff.size() == qg.edges.size(), "cycle does not match the quotient graph");

  std::vector<size_t> root(qg.vertex_count());
  std::iota(root.begin(), root.end(), size_t{0});
  std::function<size_t(size_t)> find = [&](size_t x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  std::vector<char> touched(qg.vertex_count(), 0);
  for (size_t e = 0; e < path.edge_coeff.size(); ++e) {
    if (path.edge_coeff[e] == 0) continue;
    size_t a = qg.vertex_id(0, qg.edges[e].src);
    size_t b = qg.vertex_id(1, qg.edges[e].tgt);
    touched[a] = touched[b] = 1;
    root[find(a)] = find(b);
  }
  CycleShape shape;
  for (size_t v = 0; v < qg.vertex_count(); ++v)
    if (touched[v] && find(v) == v) ++shape.components;
  for (const auto& v : vecs) shape.splitting.emplace_back(v.d, kronecker(-v.d, qg.p));
  return shape;
}

std::vector<Int> suggest_discriminants(const Int& q, const Int& p, const Int& h_bound,
                                       const Int& d_max) {
  std::vector<Int> out;
  for (Int d = 3; d <= d_max; ++d) {
    if (d % 4 != 0 && d % 4 != 3) continue;
    if (kronecker(-d, q) != -1) continue;
    if (kronecker(-d, p) == -1) continue;
    if (class_number(d) > h_bound) continue;
    out.push_back(d);
  }
  return out;
}

std::string gross_to_json(const DualGraph& g, const GrossVector& v) {
  nlohmann::json out;
  out["disc"] = ("-" + v.d.str());
  out["supported"] = v.supported;
  if (!v.supported) out["reason"] = v.reason;
  out["norm"] = v.norm == GrossNorm::kAutomorphism ? "automorphism" : "width";
  nlohmann::json support = nlohmann::json::array();
  for (size_t e = 0; e < v.coeff.size(); ++e) {
    if (v.coeff[e] == 0) continue;
    nlohmann::json je;
    je["edge"] = e;
    je["src"] = g.edges[e].src;
    je["tgt"] = g.edges[e].tgt;
    je["coeff"] = v.coeff[e].str();
    support.push_back(je);
  }
  out["support"] = support;
  if (!v.pushed.empty()) {
    nlohmann::json pushed = nlohmann::json::array();
    for (size_t e = 0; e < v.pushed.size(); ++e) {
      if (v.pushed[e] == 0) continue;
      nlohmann::json je;
      je["edge"] = e;
      je["coeff"] = v.pushed[e].str();
      pushed.push_back(je);
    }
    out["pushed"] = pushed;
  }
  return out.dump(2);
}

std::string cycle_to_json(const std::vector<GrossVector>& vecs, const CyclePath& path) {
  nlohmann::json out;
  nlohmann::json discs = nlohmann::json::array();
  for (const auto& v : vecs) discs.push_back("-" + v.d.str());
  out["discs"] = discs;
  out["found"] = path.found;
  if (!path.found) {
    out["note"] = path.note;
    return out.dump(2);
  }
  nlohmann::json lambda = nlohmann::json::array();
  for (const auto& l : path.lambda) lambda.push_back(l.str());
  out["lambda"] = lambda;
  out["scale"] = 6;
  out["exceptional_coeff"] = path.exceptional_coeff.str();
  out["boundary_zero"] = path.boundary_zero;
  out["unit_mod_p"] = path.unit_mod_p;
  Int checksum = 0;
  for (const auto& c : path.edge_coeff) checksum += boost::multiprecision::abs(c);
  out["support_l1"] = checksum.str();
  return out.dump(2);
}

}  // namespace shimura
