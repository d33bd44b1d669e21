#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "shimura/arith.hpp"
#include "shimura/intmath.hpp"
#include "shimura/winding.hpp"

using namespace shimura;

namespace {

struct Level13 {
  DualGraph g;
  QuotientGraph qg;
  ExceptionalComponent exc;
  std::vector<Order> eords;
  Level13()
      : g(build_graph(13, 11)),
        qg(quotient_by(g, atkin_lehner(g, 11))),
        exc(exceptional_component(g, atkin_lehner(g, 13), qg, desingularize(qg))),
        eords(edge_orders(g)) {}
};

Level13& fixture() {
  static Level13 f;
  return f;
}

// vertex pushforward matching the quotient identification: class orbits, per copy
std::vector<Rat> push_vertices(const DualGraph& g, const QuotientGraph& qg,
                               const std::vector<Rat>& div) {
  std::vector<Rat> out(qg.vertex_count(), Rat(0));
  for (size_t c = 0; c < g.h(); ++c) {
    out[qg.vertex_id(0, qg.orbit_of[c])] += div[c];
    out[qg.vertex_id(1, qg.orbit_of[c])] += div[g.h() + c];
  }
  return out;
}

bool all_zero(const std::vector<Rat>& v) {
  return std::all_of(v.begin(), v.end(), [](const Rat& x) { return x == 0; });
}

}  // namespace

TEST_CASE("eisenstein vector weight and hecke eigenvalue") {
  Algebra A = build_algebra(11);
  ClassSet cs = ideal_classes(A, maximal_order(A));
  EisensteinVector eis = eisenstein_vector(cs);
  CHECK(eis.weight == Rat(5, 6));
  REQUIRE(eis.entry.size() == 2);

  for (int n : {2, 3, 5, 7, 13}) {
    ZMat b = brandt_matrix(A, cs, n);
    for (size_t j = 0; j < eis.entry.size(); ++j) {
      Rat acc(0);
      for (size_t i = 0; i < eis.entry.size(); ++i) acc += eis.entry[i] * Rat(b[i][j]);
      CHECK(acc == Rat(n + 1) * eis.entry[j]);
    }
  }

  Algebra A5 = build_algebra(23);
  ClassSet cs5 = ideal_classes(A5, maximal_order(A5));
  CHECK(eisenstein_vector(cs5).weight == Rat(22, 12));
}

TEST_CASE("gross vectors on the level-13 graph") {
  auto& f = fixture();

  GrossVector e4 = gross_vector(f.g, f.eords, 4);
  REQUIRE(e4.supported);
  for (size_t e = 0; e < f.g.edges.size(); ++e) {
    if (f.g.edges[e].width == 2)
      CHECK(e4.coeff[e] == Rat(2));  // two embeddings, trivial automorphisms
    else
      CHECK(e4.coeff[e] == 0);
  }

  GrossVector e4w = gross_vector(f.g, f.eords, 4, GrossNorm::kWidth);
  for (size_t e = 0; e < f.g.edges.size(); ++e)
    if (f.g.edges[e].width == 2) CHECK(e4w.coeff[e] == Rat(1));

  GrossVector e3 = gross_vector(f.g, f.eords, 3);
  REQUIRE(e3.supported);
  for (size_t e = 0; e < f.g.edges.size(); ++e) {
    if (f.g.edges[e].width == 3)
      CHECK(e3.coeff[e] == Rat(1));  // 2 embeddings over |Aut| = 2
    else
      CHECK(e3.coeff[e] == 0);
  }
  GrossVector e3w = gross_vector(f.g, f.eords, 3, GrossNorm::kWidth);
  for (size_t e = 0; e < f.g.edges.size(); ++e) {
    CHECK(boost::multiprecision::denominator(Rat(e3w.coeff[e] * 6)) == 1);
    if (f.g.edges[e].width == 3) CHECK(e3w.coeff[e] == Rat(2, 3));
  }
}

TEST_CASE("gross vector preconditions flag instead of throwing") {
  auto& f = fixture();

  GrossVector e7 = gross_vector(f.g, f.eords, 7);  // -7 is a square mod 11
  CHECK_FALSE(e7.supported);
  CHECK(e7.reason.find("square mod q") != std::string::npos);
  CHECK(all_zero(e7.coeff));

  GrossVector e20 = gross_vector(f.g, f.eords, 20);  // 13 inert in the order
  CHECK_FALSE(e20.supported);
  CHECK(e20.reason.find("inert") != std::string::npos);
  CHECK(all_zero(e20.coeff));

  CHECK_THROWS(gross_vector(f.g, f.eords, 5));  // -5 is not a discriminant
}

TEST_CASE("boundary and pushforward") {
  auto& f = fixture();
  size_t ne = f.g.edges.size();

  std::vector<Rat> zero(ne, Rat(0));
  CHECK(all_zero(boundary(f.g, zero)));

  std::vector<Rat> single(ne, Rat(0));
  single[0] = Rat(1);
  std::vector<Rat> div = boundary(f.g, single);
  CHECK(div[f.g.edges[0].src] == Rat(-1));
  CHECK(div[f.g.h() + f.g.edges[0].tgt] == Rat(1));
  Rat total(0);
  for (const auto& x : div) total += x;
  CHECK(total == 0);

  // the degree-4 vector concentrates on the unit-orbit class in both copies
  GrossVector e4 = gross_vector(f.g, f.eords, 4);
  std::vector<Rat> d4 = boundary(f.g, e4.coeff);
  size_t w2cls = f.g.h();
  for (size_t c = 0; c < f.g.h(); ++c)
    if (f.g.classes.cls[c].w == 2) w2cls = c;
  REQUIRE(w2cls < f.g.h());
  for (size_t v = 0; v < f.g.vertex_count(); ++v) {
    if (v == w2cls)
      CHECK(d4[v] == Rat(-4));
    else if (v == f.g.h() + w2cls)
      CHECK(d4[v] == Rat(4));
    else
      CHECK(d4[v] == 0);
  }

  // pushforward lands on the exceptional edge alone
  std::vector<Rat> p4 = pushforward(f.qg, e4.coeff);
  for (size_t e = 0; e < p4.size(); ++e) {
    if (e == f.exc.qedge)
      CHECK(p4[e] == Rat(4));
    else
      CHECK(p4[e] == 0);
  }

  // boundary commutes with pushforward, on gross vectors and on a dense vector
  GrossVector e3 = gross_vector(f.g, f.eords, 3);
  std::vector<Rat> dense(ne);
  for (size_t e = 0; e < ne; ++e) dense[e] = Rat(Int(2 * e + 1), Int(3));
  for (const auto& vec : {e4.coeff, e3.coeff, dense}) {
    std::vector<Rat> a = boundary(f.qg, pushforward(f.qg, vec));
    std::vector<Rat> b = push_vertices(f.g, f.qg, boundary(f.g, vec));
    CHECK(a == b);
  }
}

TEST_CASE("cycle search failures are verdicts") {
  auto& f = fixture();

  std::vector<GrossVector> none;
  CyclePath empty = find_cycle_combination(f.g, f.qg, none, f.exc.qedge);
  CHECK_FALSE(empty.found);
  CHECK(empty.note.find("empty") != std::string::npos);

  std::vector<GrossVector> bad{gross_vector(f.g, f.eords, 7)};
  CyclePath flagged = find_cycle_combination(f.g, f.qg, bad, f.exc.qedge);
  CHECK_FALSE(flagged.found);
  CHECK(flagged.note.find("-7") != std::string::npos);

  // the degree-4 vector alone has nonzero boundary: no cycle in its span
  std::vector<GrossVector> lone{gross_vector(f.g, f.eords, 4)};
  CyclePath open = find_cycle_combination(f.g, f.qg, lone, f.exc.qedge);
  CHECK_FALSE(open.found);
  CHECK(open.note.find("no cycle") != std::string::npos);
}

TEST_CASE("cycle search on parallel quotient edges") {
  auto& f = fixture();

  // two distinct width-1 quotient edges with the same endpoints
  size_t ea = f.qg.edges.size(), eb = ea;
  for (size_t a = 0; a < f.qg.edges.size() && eb == f.qg.edges.size(); ++a) {
    if (f.qg.edges[a].width != 1) continue;
    for (size_t b = a + 1; b < f.qg.edges.size(); ++b) {
      if (f.qg.edges[b].width != 1) continue;
      if (f.qg.edges[a].src == f.qg.edges[b].src && f.qg.edges[a].tgt == f.qg.edges[b].tgt) {
        ea = a;
        eb = b;
        break;
      }
    }
  }
  REQUIRE(eb < f.qg.edges.size());

  auto indicator = [&](size_t qe, const Int& d) {
    GrossVector v;
    v.d = d;
    v.coeff.assign(f.g.edges.size(), Rat(0));
    for (size_t id : f.qg.edges[qe].orbit) v.coeff[id] = Rat(1);
    return v;
  };
  std::vector<GrossVector> vecs{indicator(ea, 3), indicator(eb, 4)};

  CyclePath path = find_cycle_combination(f.g, f.qg, vecs, ea);
  REQUIRE(path.found);
  CHECK(path.boundary_zero);
  CHECK(path.unit_mod_p);
  REQUIRE(path.lambda.size() == 2);
  CHECK(path.lambda[0] == 1);
  CHECK(path.lambda[1] == -1);
  CHECK(path.exceptional_coeff == 12);  // 6 * orbit size 2
  CHECK(path.edge_coeff[eb] == -12);

  CycleShape shape = cycle_shape_report(f.qg, path, vecs);
  CHECK(shape.components == 1);
  REQUIRE(shape.splitting.size() == 2);
  CHECK(shape.splitting[0] == std::make_pair(Int(3), 1));
  CHECK(shape.splitting[1] == std::make_pair(Int(4), 1));

  // same span, but the unit condition is demanded where the cycle vanishes
  size_t other = f.qg.edges.size();
  for (size_t e = 0; e < f.qg.edges.size(); ++e)
    if (e != ea && e != eb) other = e;
  REQUIRE(other < f.qg.edges.size());
  CyclePath miss = find_cycle_combination(f.g, f.qg, vecs, other);
  CHECK_FALSE(miss.found);
  CHECK(miss.note.find("unit") != std::string::npos);

  CHECK(cycle_to_json(vecs, path).find("lambda") != std::string::npos);
  CHECK(cycle_to_json(vecs, miss).find("note") != std::string::npos);
}

TEST_CASE("discriminant scan") {
  std::vector<Int> small = suggest_discriminants(11, 13, 1, 20);
  CHECK(small == std::vector<Int>{3, 4, 12, 16});

  std::vector<Int> large = suggest_discriminants(251, 137, 2, 300);
  for (int d : {4, 28, 36, 267})
    CHECK(std::find(large.begin(), large.end(), Int(d)) != large.end());
  CHECK(std::find(large.begin(), large.end(), Int(3)) == large.end());  // 137 inert
}

TEST_CASE("gross vector serialization") {
  auto& f = fixture();
  GrossVector e4 = gross_vector(f.g, f.eords, 4);
  std::string js = gross_to_json(f.g, e4);
  CHECK(js.find("\"disc\": \"-4\"") != std::string::npos);
  CHECK(js.find("\"support\"") != std::string::npos);
  CHECK(js.find("automorphism") != std::string::npos);

  GrossVector e7 = gross_vector(f.g, f.eords, 7);
  CHECK(gross_to_json(f.g, e7).find("reason") != std::string::npos);
}
