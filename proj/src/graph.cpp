#include "shimura/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace shimura {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("graph: " + msg);
}

void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

using Line = std::pair<u64, u64>;

u64 small_prime(const Int& p) {
  require(p > 2 && p < Int(1) << 32, "level prime out of range");
  return p.convert_to<u64>();
}

Line normalize_line(u64 p, u64 a, u64 b) {
  a %= p;
  b %= p;
  require(a != 0 || b != 0, "zero line");
  if (a == 0) return {0, 1};
  return {1, mulmod(b, invmod(a, p), p)};
}

Line apply_line(u64 p, const Mat2& m, const Line& v) {
  u64 a = (mulmod(m[0][0], v.first, p) + mulmod(m[0][1], v.second, p)) % p;
  u64 b = (mulmod(m[1][0], v.first, p) + mulmod(m[1][1], v.second, p)) % p;
  return normalize_line(p, a, b);
}

std::vector<Line> all_lines(u64 p) {
  std::vector<Line> out;
  out.reserve(p + 1);
  for (u64 t = 0; t < p; ++t) out.push_back({1, t});
  out.push_back({0, 1});
  return out;
}

// orbit of a line under the projective unit action, in first-seen order
std::vector<Line> line_orbit(u64 p, const std::vector<Mat2>& mats, Line v) {
  std::vector<Line> orbit{v};
  for (size_t k = 0; k < orbit.size(); ++k) {
    for (const auto& m : mats) {
      Line w = apply_line(p, m, orbit[k]);
      if (std::find(orbit.begin(), orbit.end(), w) == orbit.end())
        orbit.push_back(w);
    }
  }
  return orbit;
}

Int int_sqrt_term(const Int& p) { return p; }

double to_double(const Rat& r) { return r.convert_to<double>(); }

// the two classical modular relations as {i, j, coefficient} terms with
// i >= j; symmetric completion is implied
struct PhiTerm {
  int i;
  int j;
  const char* c;
};

const PhiTerm kPhi2[] = {
    {3, 0, "1"},          {2, 2, "-1"},
    {2, 1, "1488"},       {2, 0, "-162000"},
    {1, 1, "40773375"},   {1, 0, "8748000000"},
    {0, 0, "-157464000000000"},
};

const PhiTerm kPhi3[] = {
    {4, 0, "1"},
    {3, 3, "-1"},
    {3, 2, "2232"},
    {3, 1, "-1069956"},
    {3, 0, "36864000"},
    {2, 2, "2587918086"},
    {2, 1, "8900222976000"},
    {2, 0, "452984832000000"},
    {1, 1, "-770845966336000000"},
    {1, 0, "1855425871872000000000"},
};

Fq2 coeff_mod(const Fq2Ctx& F, const Int& c) {
  Int r = c % Int(F.q);
  if (r < 0) r += F.q;
  return Fq2{r.convert_to<u64>(), 0};
}

template <size_t N>
PolyQ2 phi_in_y(const Fq2Ctx& F, const PhiTerm (&terms)[N], int deg, Fq2 x) {
  std::vector<Fq2> xpow(deg + 1);
  xpow[0] = F.from(1);
  for (int k = 1; k <= deg; ++k) xpow[k] = F.mul(xpow[k - 1], x);
  PolyQ2 out(deg + 1, Fq2{0, 0});
  for (const auto& t : terms) {
    Fq2 c = coeff_mod(F, Int(t.c));
    out[t.j] = F.add(out[t.j], F.mul(c, xpow[t.i]));
    if (t.i != t.j) out[t.i] = F.add(out[t.i], F.mul(c, xpow[t.j]));
  }
  return poly_trim(std::move(out));
}

// multiplicity of r as a root of the monic polynomial f
int root_multiplicity(const Fq2Ctx& F, PolyQ2 f, Fq2 r) {
  PolyQ2 lin{F.neg(r), F.from(1)};
  int m = 0;
  while (poly_deg(f) > 0) {
    auto [quo, rem] = poly_divrem(F, f, lin);
    if (poly_deg(rem) >= 0) break;
    ++m;
    f = std::move(quo);
  }
  return m;
}

struct Matcher {
  size_t h;
  std::vector<std::vector<int>> a2, a3;  // root x root multiplicities
  ZMat b2, b3;                           // class x class
  std::vector<size_t> conj;              // Galois involution on roots
  std::vector<bool> rational;
  std::vector<bool> is1728, is0;
  const DualGraph* g;
  std::vector<size_t> order;  // class assignment order
  std::vector<int> assign;    // class -> root
  std::vector<bool> used;
  std::vector<std::vector<int>> found;
  size_t cap = 64;

  bool compatible(size_t c, size_t a) const {
    const auto& cls = g->classes.cls;
    if (rational[a] != (g->sigma[c] == c)) return false;
    if ((cls[c].w == 2) != is1728[a]) return false;
    if ((cls[c].w == 3) != is0[a]) return false;
    for (size_t d = 0; d < h; ++d) {
      if (assign[d] < 0) continue;
      size_t b = assign[d];
      if (b2[c][d] != a2[a][b] || b2[d][c] != a2[b][a]) return false;
      if (b3[c][d] != a3[a][b] || b3[d][c] != a3[b][a]) return false;
    }
    return true;
  }

  void search(size_t k) {
    if (found.size() >= cap) return;
    if (k == h) {
      found.push_back(assign);
      return;
    }
    size_t c = order[k];
    for (size_t a = 0; a < h; ++a) {
      if (used[a] || !compatible(c, a)) continue;
      assign[c] = static_cast<int>(a);
      used[a] = true;
      search(k + 1);
      assign[c] = -1;
      used[a] = false;
    }
  }
};

}  // namespace

DualGraph build_graph(const Int& p, const Int& q, u64 seed) {
  require(p != q, "level prime equals the ramified prime");
  u64 pu = small_prime(p);
  require(is_prime(pu), "level must be prime");

  DualGraph g;
  g.alg = build_algebra(q);
  g.p = p;
  g.seed = seed;
  Order base = maximal_order(g.alg);
  g.classes = ideal_classes(g.alg, base);
  size_t h = g.h();

  g.splits.reserve(h);
  for (size_t j = 0; j < h; ++j)
    g.splits.push_back(
        split_order_mod_p(g.alg, g.classes.cls[j].right_ord, pu, seed + 7919 * j));

  g.edge_at.assign(h, {});
  size_t lines_seen = 0;
  for (size_t j = 0; j < h; ++j) {
    const IdealClass& c = g.classes.cls[j];
    std::vector<Mat2> mats;
    mats.reserve(c.units.size());
    for (const auto& u : c.units) mats.push_back(split_apply(g.splits[j], u));

    for (const Line& v : all_lines(pu)) {
      if (g.edge_at[j].count(v)) continue;
      std::vector<Line> orbit = line_orbit(pu, mats, v);
      require(static_cast<size_t>(c.w) % orbit.size() == 0, "orbit size");
      int width = c.w / static_cast<int>(orbit.size());
      require(width >= 1 && width <= 3, "edge width out of range");

      GraphEdge e;
      e.src = j;
      e.width = width;
      e.lines = orbit;
      e.kernel = kernel_ideal(g.alg, c.right_ord, g.splits[j], v.first, v.second);
      Ideal t = ideal_mul(g.alg, c.ideal, e.kernel);
      e.tgt = identify_class(g.alg, g.classes, t, &e.trans);

      size_t id = g.edges.size();
      for (const Line& w : orbit) g.edge_at[j].emplace(w, id);
      lines_seen += orbit.size();
      g.edges.push_back(std::move(e));
    }
    require(g.edge_at[j].size() == pu + 1, "line partition incomplete");
  }
  require(lines_seen == (pu + 1) * h, "line count mismatch");

  g.sigma.resize(h);
  g.twosided.reserve(h);
  g.sigma_trans.resize(h);
  for (size_t j = 0; j < h; ++j) {
    Ideal tw = atkin_lehner_ideal(g.alg, g.classes.cls[j].right_ord, q);
    Ideal t = ideal_mul(g.alg, g.classes.cls[j].ideal, tw);
    g.sigma[j] = identify_class(g.alg, g.classes, t, &g.sigma_trans[j]);
    g.twosided.push_back(std::move(tw));
  }
  for (size_t j = 0; j < h; ++j) {
    require(g.sigma[g.sigma[j]] == j, "class involution");
    require(g.classes.cls[g.sigma[j]].w == g.classes.cls[j].w,
            "weight along involution");
  }
  return g;
}

ALAction atkin_lehner(const DualGraph& g, const Int& ell) {
  size_t h = g.h();
  size_t ne = g.edges.size();
  u64 pu = small_prime(g.p);

  ALAction a;
  a.ell = ell;
  a.vertex_perm.resize(2 * h);
  a.edge_perm.resize(ne);
  a.edge_sign.assign(ne, 1);

  if (ell == g.p) {
    a.swaps_copies = true;
    for (size_t c = 0; c < h; ++c) {
      a.vertex_perm[c] = h + c;
      a.vertex_perm[h + c] = c;
    }
    for (size_t e = 0; e < ne; ++e) {
      const GraphEdge& ed = g.edges[e];
      Ideal dual = ideal_conj(ed.kernel);
      Lat moved =
          lat_conjugate_by(g.alg, dual.lat, ed.trans.num, ed.trans.den);
      Ideal im = make_ideal(g.alg, moved);
      require(im.nrd == g.p, "dual kernel norm");
      Line v = kernel_line(g.alg, g.classes.cls[ed.tgt].right_ord,
                           g.splits[ed.tgt], im);
      auto it = g.edge_at[ed.tgt].find(normalize_line(pu, v.first, v.second));
      require(it != g.edge_at[ed.tgt].end(), "dual kernel line unmatched");
      a.edge_perm[e] = it->second;
    }
    for (size_t e = 0; e < ne; ++e) {
      size_t f = a.edge_perm[e];
      require(a.edge_perm[f] == e, "edge involution");
      require(g.edges[f].src == g.edges[e].tgt &&
                  g.edges[f].tgt == g.edges[e].src,
              "copy swap on endpoints");
      require(g.edges[f].width == g.edges[e].width, "width along involution");
      if (f == e) a.edge_sign[e] = -1;
    }
    return a;
  }

  require(ell == g.alg.q, "involution index must be p or q");
  a.swaps_copies = false;
  for (size_t c = 0; c < h; ++c) {
    a.vertex_perm[c] = g.sigma[c];
    a.vertex_perm[h + c] = h + g.sigma[c];
  }
  for (size_t e = 0; e < ne; ++e) {
    const GraphEdge& ed = g.edges[e];
    size_t s = g.sigma[ed.src];
    const Transporter& b = g.sigma_trans[ed.src];
    Lat moved = lat_conjugate_by(g.alg, ed.kernel.lat, b.num, b.den);
    Ideal im = make_ideal(g.alg, moved);
    require(im.nrd == g.p, "transported kernel norm");
    Line v =
        kernel_line(g.alg, g.classes.cls[s].right_ord, g.splits[s], im);
    auto it = g.edge_at[s].find(normalize_line(pu, v.first, v.second));
    require(it != g.edge_at[s].end(), "transported kernel line unmatched");
    a.edge_perm[e] = it->second;
  }
  for (size_t e = 0; e < ne; ++e) {
    size_t f = a.edge_perm[e];
    require(a.edge_perm[f] == e, "edge involution");
    require(g.edges[f].src == g.sigma[g.edges[e].src] &&
                g.edges[f].tgt == g.sigma[g.edges[e].tgt],
            "equivariance on endpoints");
    require(g.edges[f].width == g.edges[e].width, "width along involution");
  }
  return a;
}

QuotientGraph quotient_by(const DualGraph& g, const ALAction& a) {
  require(!a.swaps_copies, "quotient needs the copy-preserving involution");
  size_t h = g.h();

  QuotientGraph q;
  q.p = g.p;
  q.orbit_of.assign(h, SIZE_MAX);
  for (size_t c = 0; c < h; ++c) {
    if (q.orbit_of[c] != SIZE_MAX) continue;
    size_t idx = q.class_orbits.size();
    std::vector<size_t> orb{c};
    q.orbit_of[c] = idx;
    size_t d = g.sigma[c];
    if (d != c) {
      orb.push_back(d);
      q.orbit_of[d] = idx;
    }
    q.orbit_w.push_back(g.classes.cls[c].w);
    q.class_orbits.push_back(std::move(orb));
  }

  size_t ne = g.edges.size();
  q.qedge_of.assign(ne, SIZE_MAX);
  for (size_t e = 0; e < ne; ++e) {
    if (q.qedge_of[e] != SIZE_MAX) continue;
    size_t f = a.edge_perm[e];
    if (f == e)
      throw UnsupportedCase("quotient: edge fixed by the involution");
    QuotientEdge qe;
    qe.orbit = {e, f};
    qe.src = q.orbit_of[g.edges[e].src];
    qe.tgt = q.orbit_of[g.edges[e].tgt];
    qe.width = g.edges[e].width;
    require(g.edges[f].width == qe.width, "orbit width mismatch");
    size_t id = q.edges.size();
    q.qedge_of[e] = id;
    q.qedge_of[f] = id;
    q.edges.push_back(std::move(qe));
  }
  return q;
}

ResolvedGraph desingularize(const QuotientGraph& q) {
  ResolvedGraph r;
  r.vertices = q.vertex_count();
  r.vertex_parent.assign(r.vertices, -1);
  for (size_t e = 0; e < q.edges.size(); ++e) {
    const QuotientEdge& qe = q.edges[e];
    size_t a = q.vertex_id(0, qe.src);
    size_t b = q.vertex_id(1, qe.tgt);
    size_t prev = a;
    for (int k = 1; k < qe.width; ++k) {
      size_t mid = r.vertices++;
      r.vertex_parent.push_back(static_cast<long long>(e));
      r.edges.push_back({prev, mid});
      r.parent.push_back(e);
      prev = mid;
    }
    r.edges.push_back({prev, b});
    r.parent.push_back(e);
  }

  GraphShape before = graph_shape(q.vertex_count(), edge_endpoints(q));
  GraphShape after = graph_shape(r.vertices, r.edges);
  require(before.h1 == after.h1 && before.components == after.components,
          "resolution changed the homology");
  return r;
}

GraphShape graph_shape(size_t vertices,
                       const std::vector<std::pair<size_t, size_t>>& edges) {
  std::vector<std::vector<size_t>> adj(vertices);
  for (const auto& [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<bool> seen(vertices, false);
  size_t comp = 0;
  for (size_t s = 0; s < vertices; ++s) {
    if (seen[s]) continue;
    ++comp;
    std::vector<size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      size_t u = stack.back();
      stack.pop_back();
      for (size_t v : adj[u])
        if (!seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
    }
  }
  return {comp, edges.size() - vertices + comp};
}

std::vector<std::pair<size_t, size_t>> edge_endpoints(const DualGraph& g) {
  std::vector<std::pair<size_t, size_t>> out;
  out.reserve(g.edges.size());
  for (const auto& e : g.edges) out.push_back({e.src, g.h() + e.tgt});
  return out;
}

std::vector<std::pair<size_t, size_t>> edge_endpoints(const QuotientGraph& q) {
  std::vector<std::pair<size_t, size_t>> out;
  out.reserve(q.edges.size());
  for (const auto& e : q.edges)
    out.push_back({q.vertex_id(0, e.src), q.vertex_id(1, e.tgt)});
  return out;
}

CutReport cut_report(size_t vertices,
                     const std::vector<std::pair<size_t, size_t>>& edges) {
  std::vector<std::vector<std::pair<size_t, size_t>>> adj(vertices);
  for (size_t e = 0; e < edges.size(); ++e) {
    auto [u, v] = edges[e];
    if (u == v) continue;
    adj[u].push_back({v, e});
    adj[v].push_back({u, e});
  }

  std::vector<size_t> disc(vertices, 0), low(vertices, 0);
  std::vector<bool> seen(vertices, false), cut(vertices, false);
  std::vector<size_t> bridges;
  size_t timer = 1, comp = 0;

  struct Frame {
    size_t v;
    size_t in_edge;  // edge id used to enter, SIZE_MAX at a root
    size_t next;     // adjacency cursor
    size_t children;
  };

  for (size_t s = 0; s < vertices; ++s) {
    if (seen[s]) continue;
    ++comp;
    std::vector<Frame> st{{s, SIZE_MAX, 0, 0}};
    seen[s] = true;
    disc[s] = low[s] = timer++;
    while (!st.empty()) {
      Frame& f = st.back();
      if (f.next < adj[f.v].size()) {
        auto [w, id] = adj[f.v][f.next++];
        if (id == f.in_edge) continue;
        if (seen[w]) {
          low[f.v] = std::min(low[f.v], disc[w]);
        } else {
          seen[w] = true;
          disc[w] = low[w] = timer++;
          ++f.children;
          st.push_back({w, id, 0, 0});
        }
      } else {
        Frame done = f;
        st.pop_back();
        if (st.empty()) {
          if (done.children >= 2) cut[done.v] = true;
          continue;
        }
        Frame& par = st.back();
        low[par.v] = std::min(low[par.v], low[done.v]);
        if (low[done.v] > disc[par.v]) bridges.push_back(done.in_edge);
        if (low[done.v] >= disc[par.v] && par.in_edge != SIZE_MAX)
          cut[par.v] = true;
      }
    }
  }

  CutReport r;
  r.connected = comp <= 1;
  std::sort(bridges.begin(), bridges.end());
  r.bridges = std::move(bridges);
  for (size_t v = 0; v < vertices; ++v)
    if (cut[v]) r.cut_vertices.push_back(v);
  return r;
}

ExceptionalComponent exceptional_component(const DualGraph& g,
                                           const ALAction& wp,
                                           const QuotientGraph& qg,
                                           const ResolvedGraph& rg) {
  if (g.p % 4 != 1 || g.alg.q % 4 != 3 || kronecker(g.alg.q, g.p) != -1)
    throw UnsupportedCase("exceptional component: congruence pattern");
  require(wp.swaps_copies && wp.ell == g.p, "wrong involution");

  std::vector<size_t> candidates;
  for (size_t y = 0; y < qg.edges.size(); ++y) {
    const QuotientEdge& qe = qg.edges[y];
    if (qe.width != 2) continue;
    std::set<size_t> orbit(qe.orbit.begin(), qe.orbit.end());
    bool stable = true;
    for (size_t e : qe.orbit)
      if (!orbit.count(wp.edge_perm[e])) stable = false;
    if (stable) candidates.push_back(y);
  }
  require(candidates.size() == 1, "exceptional component not unique");
  size_t y = candidates[0];

  ExceptionalComponent ec;
  ec.qedge = y;
  ec.vertex = SIZE_MAX;
  for (size_t v = qg.vertex_count(); v < rg.vertices; ++v)
    if (rg.vertex_parent[v] == static_cast<long long>(y)) {
      require(ec.vertex == SIZE_MAX, "width-2 edge spawned two vertices");
      ec.vertex = v;
    }
  require(ec.vertex != SIZE_MAX, "resolved vertex missing");

  std::vector<size_t> inc;
  for (size_t e = 0; e < rg.edges.size(); ++e)
    if (rg.edges[e].first == ec.vertex || rg.edges[e].second == ec.vertex)
      inc.push_back(e);
  require(inc.size() == 2, "exceptional vertex degree");
  ec.incident = {inc[0], inc[1]};

  CutReport cr = cut_report(rg.vertices, rg.edges);
  ec.non_disconnecting =
      !std::count(cr.bridges.begin(), cr.bridges.end(), inc[0]) &&
      !std::count(cr.bridges.begin(), cr.bridges.end(), inc[1]);
  return ec;
}

EquidistReport equidistribution_report(const DualGraph& g,
                                       const QuotientGraph& qg) {
  size_t h = g.h();
  const Int& p = g.p;
  double sqrtp = std::sqrt(int_sqrt_term(p).convert_to<double>());

  EquidistReport rep;
  rep.eis_weight = 0;
  for (const auto& c : g.classes.cls) rep.eis_weight += Rat(1, c.w);

  std::vector<std::vector<size_t>> count(h, std::vector<size_t>(h, 0));
  for (const auto& e : g.edges) ++count[e.src][e.tgt];
  rep.dev.assign(h, std::vector<Rat>(h));
  rep.max_norm_dev = 0;
  for (size_t i = 0; i < h; ++i)
    for (size_t j = 0; j < h; ++j) {
      Rat main = Rat(p + 1) / (rep.eis_weight * g.classes.cls[i].w *
                               g.classes.cls[j].w);
      rep.dev[i][j] = Rat(count[i][j]) - main;
      rep.max_norm_dev = std::max(
          rep.max_norm_dev, std::abs(to_double(rep.dev[i][j])) / sqrtp);
    }

  size_t n = qg.orbit_count();
  std::vector<std::vector<size_t>> qcount(n, std::vector<size_t>(n, 0));
  for (const auto& e : qg.edges) ++qcount[e.src][e.tgt];
  rep.dev_quot.assign(n, std::vector<Rat>(n));
  rep.max_norm_dev_quot = 0;
  for (size_t s = 0; s < n; ++s)
    for (size_t r = 0; r < n; ++r) {
      int eps =
          (qg.class_orbits[s].size() == 1 && qg.class_orbits[r].size() == 1)
              ? 2
              : 1;
      Rat main =
          Rat(p + 1) / (rep.eis_weight * eps * qg.orbit_w[s] * qg.orbit_w[r]);
      rep.dev_quot[s][r] = Rat(qcount[s][r]) - main;
      rep.max_norm_dev_quot =
          std::max(rep.max_norm_dev_quot,
                   std::abs(to_double(rep.dev_quot[s][r])) / sqrtp);
    }

  rep.degree_law_applies = p % 4 == 1 && g.alg.q % 4 == 3 && p > 3 &&
                           g.alg.q > 3 && kronecker(g.alg.q, p) == -1;
  rep.degrees_ok = true;
  if (rep.degree_law_applies) {
    for (int copy = 0; copy < 2; ++copy)
      for (size_t s = 0; s < n; ++s) {
        Int actual = 0;
        for (const auto& e : qg.edges)
          if ((copy == 0 ? e.src : e.tgt) == s) ++actual;
        DegreeCheck dc;
        dc.orbit = s;
        dc.copy = copy;
        dc.sign = 0;
        dc.actual = actual;
        if (qg.class_orbits[s].size() == 2) {
          dc.case_id = 1;
          dc.expected = p + 1;
          dc.ok = actual == dc.expected;
        } else if (qg.orbit_w[s] == 1) {
          dc.case_id = 2;
          dc.expected = (p + 1) / 2;
          dc.ok = actual * 2 == p + 1;
        } else if (qg.orbit_w[s] == 2) {
          dc.case_id = 3;
          dc.expected = (p + 3) / 4;
          dc.ok = actual * 4 == p + 3;
        } else {
          dc.case_id = 4;
          if (actual * 6 == p + 1) {
            dc.sign = -1;
            dc.expected = actual;
            dc.ok = true;
          } else if (actual * 6 == p + 5) {
            dc.sign = 1;
            dc.expected = actual;
            dc.ok = true;
          } else {
            dc.expected = (p + 1) / 6;
            dc.ok = false;
          }
        }
        rep.degrees_ok = rep.degrees_ok && dc.ok;
        rep.degrees.push_back(std::move(dc));
      }
  }
  return rep;
}

PolyQ2 isogeny_relation2(const Fq2Ctx& F, Fq2 x) {
  return phi_in_y(F, kPhi2, 3, x);
}

PolyQ2 isogeny_relation3(const Fq2Ctx& F, Fq2 x) {
  return phi_in_y(F, kPhi3, 4, x);
}

JLabels label_vertices_by_j(const DualGraph& g, const SsPoly& ss) {
  size_t h = g.h();
  require(ss.q == g.alg.q, "invariant list is for a different field");
  require(ss.roots.size() == h, "class count vs invariant count");
  Fq2Ctx F(ss.q);

  Matcher m;
  m.h = h;
  m.g = &g;
  m.b2 = brandt_matrix(g.alg, g.classes, 2);
  m.b3 = brandt_matrix(g.alg, g.classes, 3);

  u64 j1728 = 1728 % ss.q;
  m.conj.resize(h);
  m.rational.resize(h);
  m.is1728.resize(h);
  m.is0.resize(h);
  for (size_t a = 0; a < h; ++a) {
    Fq2 r = ss.roots[a];
    m.rational[a] = F.in_base(r);
    m.is1728[a] = r == F.from(j1728);
    m.is0[a] = r == F.from(0);
    Fq2 rc = F.frob(r);
    auto it = std::find(ss.roots.begin(), ss.roots.end(), rc);
    require(it != ss.roots.end(), "invariant set not Galois stable");
    m.conj[a] = it - ss.roots.begin();
  }

  m.a2.assign(h, std::vector<int>(h, 0));
  m.a3.assign(h, std::vector<int>(h, 0));
  for (size_t a = 0; a < h; ++a) {
    PolyQ2 f2 = isogeny_relation2(F, ss.roots[a]);
    PolyQ2 f3 = isogeny_relation3(F, ss.roots[a]);
    int s2 = 0, s3 = 0;
    for (size_t b = 0; b < h; ++b) {
      m.a2[a][b] = root_multiplicity(F, f2, ss.roots[b]);
      m.a3[a][b] = root_multiplicity(F, f3, ss.roots[b]);
      s2 += m.a2[a][b];
      s3 += m.a3[a][b];
    }
    require(s2 == 3 && s3 == 4, "isogeny relation roots escape the set");
  }

  // assignment order: torsion classes first, then neighbors of placed ones
  std::vector<bool> placed(h, false);
  for (size_t c = 0; c < h; ++c)
    if (g.classes.cls[c].w > 1) {
      m.order.push_back(c);
      placed[c] = true;
    }
  if (m.order.empty()) {
    m.order.push_back(0);
    placed[0] = true;
  }
  for (size_t k = 0; k < m.order.size(); ++k) {
    size_t c = m.order[k];
    for (size_t d = 0; d < h; ++d)
      if (!placed[d] && (m.b2[c][d] != 0 || m.b3[c][d] != 0)) {
        m.order.push_back(d);
        placed[d] = true;
      }
  }
  for (size_t d = 0; d < h; ++d)
    if (!placed[d]) m.order.push_back(d);

  m.assign.assign(h, -1);
  m.used.assign(h, false);
  m.search(0);
  require(!m.found.empty(), "no consistent labeling");

  for (const auto& sol : m.found)
    for (size_t c = 0; c < h; ++c)
      require(static_cast<size_t>(sol[g.sigma[c]]) == m.conj[sol[c]],
              "labeling incompatible with the Galois action");

  JLabels out;
  out.solutions = m.found.size();
  out.ambiguous = m.found.size() > 1;
  out.j.resize(h);
  for (size_t c = 0; c < h; ++c) out.j[c] = ss.roots[m.found[0][c]];
  return out;
}

Order edge_order(const DualGraph& g, size_t edge) {
  const GraphEdge& e = g.edges.at(edge);
  const Order& left = g.classes.cls[e.src].right_ord;
  Order right = right_order(g.alg, e.kernel);
  require(right.disc == g.alg.q, "kernel right order not maximal");
  Order o = make_order(g.alg, lat_intersect(left.lat, right.lat));
  require(o.disc == g.p * g.alg.q, "edge order level");
  require(unit_group(g.alg, o).size() == 2 * static_cast<size_t>(e.width),
          "edge width vs unit group");
  return o;
}

std::vector<Order> edge_orders(const DualGraph& g) {
  std::vector<Order> out;
  out.reserve(g.edges.size());
  for (size_t e = 0; e < g.edges.size(); ++e) out.push_back(edge_order(g, e));
  return out;
}

std::string graph_to_dot(const DualGraph& g, const JLabels* labels) {
  std::ostringstream os;
  os << "graph dual {\n";
  size_t h = g.h();
  for (size_t v = 0; v < 2 * h; ++v) {
    size_t cls = v % h;
    os << "  v" << v << " [copy=" << v / h << ", cls=" << cls
       << ", w=" << g.classes.cls[cls].w;
    if (labels) {
      const Fq2& j = labels->j[cls];
      os << ", j=\"" << j.a;
      if (j.b) os << "+" << j.b << "s";
      os << "\"";
    }
    os << "];\n";
  }
  for (const auto& e : g.edges)
    os << "  v" << e.src << " -- v" << (h + e.tgt) << " [width=" << e.width
       << "];\n";
  os << "}\n";
  return os.str();
}

std::string graph_to_json(const DualGraph& g, const JLabels* labels) {
  nlohmann::json out;
  out["p"] = g.p.str();
  out["q"] = g.alg.q.str();
  out["seed"] = g.seed;
  out["classes"] = g.h();

  nlohmann::json verts = nlohmann::json::array();
  for (size_t v = 0; v < 2 * g.h(); ++v) {
    size_t cls = v % g.h();
    nlohmann::json jv;
    jv["id"] = v;
    jv["copy"] = v / g.h();
    jv["cls"] = cls;
    jv["w"] = g.classes.cls[cls].w;
    if (labels) jv["j"] = {labels->j[cls].a, labels->j[cls].b};
    verts.push_back(std::move(jv));
  }
  out["vertices"] = std::move(verts);

  nlohmann::json edges = nlohmann::json::array();
  for (size_t e = 0; e < g.edges.size(); ++e) {
    const GraphEdge& ed = g.edges[e];
    nlohmann::json je;
    je["id"] = e;
    je["src"] = ed.src;
    je["tgt"] = g.h() + ed.tgt;
    je["width"] = ed.width;
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& [a, b] : ed.lines) lines.push_back({a, b});
    je["lines"] = std::move(lines);
    edges.push_back(std::move(je));
  }
  out["edges"] = std::move(edges);

  nlohmann::json sig = nlohmann::json::array();
  for (size_t c = 0; c < g.h(); ++c) sig.push_back(g.sigma[c]);
  out["involution"] = std::move(sig);
  return out.dump(2);
}

}  // namespace shimura
