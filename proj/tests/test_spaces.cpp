#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coarse/spaces.hpp"

#include <cstdlib>

using namespace coarse;

TEST_CASE("l1 grid distances") {
  SpacePtr grid = build_grid_box(2, 5, GridNorm::L1);
  CHECK(grid->size() == 25);
  // row-major: (r, c) -> 5 r + c
  CHECK(grid->dist(0, 24) == Num(8));
  CHECK(grid->dist(7, 13) == Num(2));  // (1,2) -> (2,3)
  CHECK(grid->exact());
}

TEST_CASE("l2 grid is a nested product of lines") {
  SpacePtr grid = build_grid_box(2, 4, GridNorm::L2);
  CHECK(grid->size() == 16);
  CHECK(grid->dist(0, 5).value() == doctest::Approx(std::sqrt(2.0)));
  CHECK(grid->dist(0, 3) == Num(3));  // axis-aligned stays exact
  auto shape = grid_shape(grid);
  REQUIRE(shape.has_value());
  CHECK(shape->sides == std::vector<int>{4, 4});
  CHECK(shape->norm == GridNorm::L2);
}

TEST_CASE("graph metric equals an independent Floyd-Warshall") {
  // Fixed test graph: a 6-cycle with one chord and rational weights.
  std::vector<WeightedEdge> edges{{0, 1, Rat(1)},       {1, 2, Rat(2)}, {2, 3, Rat(1, 2)},
                                  {3, 4, Rat(1)},       {4, 5, Rat(3)}, {5, 0, Rat(1)},
                                  {1, 4, Rat(3, 2)}};
  SpacePtr g = build_graph_metric(edges);
  REQUIRE(g->size() == 6);
  Rat inf(1000000);
  std::vector<std::vector<Rat>> d(6, std::vector<Rat>(6, inf));
  for (int i = 0; i < 6; ++i) d[i][i] = Rat(0);
  for (const auto& e : edges) {
    int u = g->index_of(e.u), v = g->index_of(e.v);
    if (e.weight < d[u][v]) d[u][v] = d[v][u] = e.weight;
  }
  for (int k = 0; k < 6; ++k)
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) CHECK(g->dist(i, j) == Num(d[i][j]));
}

TEST_CASE("disconnected graphs are rejected") {
  std::vector<WeightedEdge> edges{{0, 1, Rat(1)}, {2, 3, Rat(1)}};
  CHECK_THROWS_WITH_AS(build_graph_metric(edges), doctest::Contains("disconnected"), Error);
}

TEST_CASE("cycle metric wraps around") {
  SpacePtr c = build_named_space("cycle:16");
  CHECK(c->size() == 16);
  CHECK(c->dist(0, 9) == Num(7));
  CHECK(c->dist(0, 8) == Num(8));
  CHECK(c->dist(3, 5) == Num(2));
}

TEST_CASE("binary tree metric") {
  SpacePtr t = build_named_space("tree:6");
  CHECK(t->size() == 127);
  CHECK(t->dist(0, 1) == Num(1));
  // Two depth-6 leaves in different root subtrees: 12 apart.
  CHECK(t->dist(t->index_of(63), t->index_of(126)) == Num(12));
  CHECK(t->dist(t->index_of(63), t->index_of(64)) == Num(2));  // siblings under node 31
}

TEST_CASE("free group ball: sizes, symmetry, cancellation") {
  // |B(r)| for rank 2: 1, 5, 17, 53, 161.
  CHECK(build_cayley_ball(parse_preset("free:2"), Rat(0)).space->size() == 1);
  CHECK(build_cayley_ball(parse_preset("free:2"), Rat(1)).space->size() == 5);
  CHECK(build_cayley_ball(parse_preset("free:2"), Rat(2)).space->size() == 17);
  auto ball = build_cayley_ball(parse_preset("free:2"), Rat(4));
  const SpacePtr& s = ball.space;
  CHECK(s->size() == 161);
  // d(g, h) = |g^{-1} h|: words "ab" and "aB" differ by "Bb" cancellation -> 2.
  int id_e = -1, id_a = -1;
  for (int i = 0; i < s->size(); ++i) {
    if (ball.labels[i] == "e") id_e = i;
    if (ball.labels[i] == "a") id_a = i;
  }
  REQUIRE(id_e >= 0);
  REQUIRE(id_a >= 0);
  CHECK(s->dist(id_e, id_a) == Num(1));
  CHECK(ball.word_length(id_a) == Num(1));
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) CHECK(s->dist(i, j) == s->dist(j, i));
}

TEST_CASE("free abelian ball sizes and l1 word metric") {
  auto ball = build_cayley_ball(parse_preset("free-abelian:2"), Rat(3));
  CHECK(ball.space->size() == 25);
  for (int i = 0; i < ball.space->size(); ++i) CHECK(le_approx(ball.word_length(i), Num(3)));
}

TEST_CASE("dihedral group ball covers the group") {
  auto ball = build_cayley_ball(parse_preset("dihedral:8"), Rat(8));
  CHECK(ball.space->size() == 16);
  Num max_wl(0);
  for (int i = 0; i < 16; ++i) max_wl = num_max(max_wl, ball.word_length(i));
  CHECK(max_wl == Num(5));  // t^4 s is the farthest element
  // Left-invariance: d(g, h) depends only on g^{-1} h.
  for (int g = 0; g < 16; ++g)
    for (int h = 0; h < 16; ++h) {
      auto gh = ball.multiply(g, h);
      REQUIRE(gh.has_value());
      CHECK(ball.space->dist(g, *gh) == ball.word_length(h));
    }
}

TEST_CASE("lamplighter truncation is metric and symmetric") {
  auto ball = build_cayley_ball(parse_preset("lamplighter-truncation:2"), Rat(4));
  CHECK(ball.space->size() > 1);
  ball.space->validate();
}

TEST_CASE("grid_shape sees grids and rejects the rest") {
  CHECK(grid_shape(build_named_space("grid:3:4"))->sides == std::vector<int>{4, 4, 4});
  CHECK(!grid_shape(build_named_space("cycle:8")).has_value());
}

TEST_CASE("named space descriptors reject junk") {
  CHECK_THROWS_AS(build_named_space("moebius:3"), Error);
  CHECK_THROWS_AS(build_named_space("grid:2"), Error);
}
