#include <random>
#include <vector>

#include "doctest.h"
#include "shimura/component_group.hpp"

using namespace shimura;

namespace {

using EdgeList = std::vector<std::pair<size_t, size_t>>;

EdgeList cycle_edges(size_t k) {
  EdgeList e;
  for (size_t i = 0; i < k; ++i) e.push_back({i, (i + 1) % k});
  return e;
}

// spanning-tree count by the classical cofactor of the degree-minus-adjacency
// matrix, independent of the Smith route
Int tree_count(size_t n, const EdgeList& edges) {
  BoundaryMaps bm = laplacian(n, edges);
  ZMat minor(n - 1, ZVec(n - 1));
  for (size_t i = 0; i + 1 < n; ++i)
    for (size_t j = 0; j + 1 < n; ++j) minor[i][j] = -bm.iota[i][j];
  return det(minor);
}

// connected random multigraph: a random spanning tree plus extra edges
EdgeList random_graph(std::mt19937_64& rng, size_t n, size_t extra) {
  EdgeList e;
  for (size_t v = 1; v < n; ++v)
    e.push_back({rng() % v, v});
  for (size_t k = 0; k < extra; ++k) {
    size_t u = rng() % n, v = rng() % n;
    if (u == v) continue;
    e.push_back({u, v});
  }
  return e;
}

ResolvedGraph plain_graph(size_t n, EdgeList edges) {
  ResolvedGraph g;
  g.vertices = n;
  g.edges = std::move(edges);
  g.parent.assign(g.edges.size(), 0);
  g.vertex_parent.assign(n, -1);
  return g;
}

}  // namespace

TEST_CASE("boundary maps factor the negated Laplacian") {
  BoundaryMaps two = laplacian(2, EdgeList{{0, 1}, {0, 1}});
  CHECK(two.iota == ZMat{{-2, 2}, {2, -2}});
  CHECK(two.d_star == transpose(two.d_upper_star));

  BoundaryMaps path = laplacian(3, EdgeList{{0, 1}, {1, 2}});
  CHECK(path.iota == ZMat{{-1, 1, 0}, {1, -2, 1}, {0, 1, -1}});

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    size_t n = 2 + rng() % 6;
    EdgeList e = random_graph(rng, n, rng() % 8);
    BoundaryMaps bm = laplacian(n, e);
    ZMat prod = mul(bm.d_star, bm.d_upper_star);
    for (size_t i = 0; i < n; ++i) {
      Int row = 0;
      for (size_t j = 0; j < n; ++j) {
        CHECK(bm.iota[i][j] == -prod[i][j]);
        CHECK(bm.iota[i][j] == bm.iota[j][i]);
        row += bm.iota[i][j];
      }
      CHECK(row == 0);
    }
  }
}

TEST_CASE("negative semidefinite with constants in the kernel") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 15; ++trial) {
    size_t n = 2 + rng() % 6;
    BoundaryMaps bm = laplacian(n, random_graph(rng, n, rng() % 6));
    for (int probe = 0; probe < 10; ++probe) {
      ZVec x(n);
      Int quad = 0;
      for (auto& v : x) v = Int(rng() % 21) - 10;
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) quad += x[i] * bm.iota[i][j] * x[j];
      CHECK(quad <= 0);
    }
  }
}

TEST_CASE("cycle and tree component groups") {
  for (size_t k = 2; k <= 12; ++k) {
    ComponentGroup cg = component_group(laplacian(k, cycle_edges(k)).iota);
    CHECK(cg.components == 1);
    CHECK(cg.free_rank == 0);
    CHECK(cg.order == k);
    if (k > 1) CHECK(cg.invariant_factors == std::vector<Int>{Int(k)});

    CHECK(is_killed_by(cg, k, 0, 1));
    CHECK(is_killed_by(cg, 2 * k, 0, 1));
    for (size_t n = 1; n < k; ++n) CHECK_FALSE(is_killed_by(cg, n, 0, 1));
  }

  ComponentGroup path = component_group(
      laplacian(5, EdgeList{{0, 1}, {1, 2}, {2, 3}, {3, 4}}).iota);
  CHECK(path.order == 1);
  CHECK(path.invariant_factors.empty());
  CHECK(is_killed_by(path, 1, 0, 4));
}

TEST_CASE("group order matches the spanning-tree count") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    size_t n = 2 + rng() % 7;
    EdgeList e = random_graph(rng, n, rng() % 10);
    ComponentGroup cg = component_group(laplacian(n, e).iota);
    CHECK(cg.components == 1);
    CHECK(cg.order == tree_count(n, e));
  }
}

TEST_CASE("membership is monotone under divisibility") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 12; ++trial) {
    size_t n = 3 + rng() % 5;
    ComponentGroup cg =
        component_group(laplacian(n, random_graph(rng, n, rng() % 6)).iota);
    for (Int m = 1; m <= 6; ++m)
      if (is_killed_by(cg, m, 0, n - 1)) {
        CHECK(is_killed_by(cg, 2 * m, 0, n - 1));
        CHECK(is_killed_by(cg, 3 * m, 0, n - 1));
      }
  }
}

TEST_CASE("disconnected graphs report a free part") {
  EdgeList two_triangles{{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}};
  ComponentGroup cg = component_group(laplacian(6, two_triangles).iota);
  CHECK(cg.components == 2);
  CHECK(cg.free_rank == 1);
  CHECK(cg.order == 9);
  CHECK_FALSE(is_killed_by(cg, 100, 0, 3));  // separated by the free part
  CHECK(is_killed_by(cg, 3, 0, 1));
}

TEST_CASE("flow law on small graphs") {
  BoundaryMaps two = laplacian(2, EdgeList{{0, 1}, {0, 1}});

  FlowReport zero = verify_flow({{0, 0}, {5, 5}}, two);
  CHECK(zero.ok);

  FlowReport hand = verify_flow({{2, -2}, {1, 0}}, two);
  CHECK(hand.ok);
  CHECK(hand.residuals == ZVec{0, 0});

  FlowReport bad = verify_flow({{2, -2}, {0, 0}}, two);
  CHECK_FALSE(bad.ok);
  CHECK(bad.residuals == ZVec{-2, 2});

  CHECK_THROWS(verify_flow({{1, 0}, {0, 0}}, two));
}

TEST_CASE("smooth-model hypothesis screen on model graphs") {
  ResolvedGraph square = plain_graph(4, cycle_edges(4));
  ComponentGroup cg = component_group(laplacian(4, square.edges).iota);

  SmoothModelReport good = smooth_model_hypotheses(square, cg, 0, 3, 13, 251);
  CHECK(good.base_assumed);
  CHECK(good.two_nondisconnecting);
  CHECK(good.degree_below_gonality);  // 735 < 3263
  CHECK(good.torsion_clear);

  SmoothModelReport killed =
      smooth_model_hypotheses(square, cg, 0, 4, 13, 251);
  CHECK_FALSE(killed.torsion_clear);
  CHECK(killed.torsion_failures.size() == 3);

  SmoothModelReport heavy =
      smooth_model_hypotheses(square, cg, 0, 14, 13, 11);
  CHECK_FALSE(heavy.degree_below_gonality);  // 3430 >= 143

  ResolvedGraph path = plain_graph(3, EdgeList{{0, 1}, {1, 2}});
  ComponentGroup pg = component_group(laplacian(3, path.edges).iota);
  SmoothModelReport mid = smooth_model_hypotheses(path, pg, 1, 2, 13, 251);
  CHECK_FALSE(mid.two_nondisconnecting);  // both incident edges are bridges
  CHECK_FALSE(mid.torsion_clear);         // trivial group kills everything
}

TEST_CASE("quotient laplacian demands unit widths") {
  DualGraph g = build_graph(13, 11);
  ALAction wq = atkin_lehner(g, 11);
  QuotientGraph qg = quotient_by(g, wq);
  CHECK_THROWS(laplacian(qg));

  ResolvedGraph rg = desingularize(qg);
  BoundaryMaps bm = laplacian(rg);
  ComponentGroup cg = component_group(bm.iota);
  CHECK(cg.components == 1);
  CHECK(cg.free_rank == 0);
  CHECK(cg.order == tree_count(rg.vertices, rg.edges));

  ALAction wp = atkin_lehner(g, 13);
  ExceptionalComponent ec = exceptional_component(g, wp, qg, rg);
  for (size_t c = 0; c < cg.vertices; ++c)
    if (c != ec.vertex) CHECK(is_killed_by(cg, cg.order, c, ec.vertex));

  SmoothModelReport rep =
      smooth_model_hypotheses(rg, cg, ec.vertex, 14, 13, 11);
  CHECK(rep.base_assumed);
  CHECK(rep.two_nondisconnecting);
  CHECK_FALSE(rep.degree_below_gonality);

  FlowReport fr = verify_flow({ZVec(cg.vertices, 0), ZVec(cg.vertices, 7)},
                              bm);
  CHECK(fr.ok);
}
