#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coarse/metric.hpp"
#include "coarse/spaces.hpp"

using namespace coarse;

TEST_CASE("rational arithmetic and text round-trip") {
  Num a(BigInt(3), BigInt(7));
  Num b(BigInt(2), BigInt(7));
  CHECK((a + b) == Num(BigInt(5), BigInt(7)));
  CHECK((a - b) == Num(BigInt(1), BigInt(7)));
  CHECK((a * b) == Num(BigInt(6), BigInt(49)));
  CHECK((a / b) == Num(BigInt(3), BigInt(2)));
  CHECK(num_to_string(a) == "3/7");
  CHECK(num_to_string(Num(BigInt(6), BigInt(3))) == "2");
  CHECK(num_from_string("3/7") == a);
  CHECK(num_from_string("-12/8") == Num(BigInt(-3), BigInt(2)));
  CHECK(num_from_string("5") == Num(5));
}

TEST_CASE("ceil_int") {
  CHECK(ceil_int(Num(5)) == 5);
  CHECK(ceil_int(Num(BigInt(7), BigInt(2))) == 4);
  CHECK(ceil_int(Num(BigInt(-7), BigInt(2))) == -3);
  CHECK(ceil_int(Num::real(2.0000000001)) == 2);  // within the guard, snaps down
  CHECK(ceil_int(Num::real(2.1)) == 3);
}

TEST_CASE("guarded comparisons never flip on float noise") {
  Num exact(3);
  Num noisy = Num::real(3.0 + 1e-12);
  CHECK(!gt_strict(noisy, exact));
  CHECK(le_approx(noisy, exact));
  CHECK(ge_approx(noisy, exact));
  CHECK(gt_strict(Num::real(3.001), exact));
}

TEST_CASE("metric validation rejects broken tables") {
  // Triangle violation: d(0,2) = 5 > d(0,1) + d(1,2) = 2.
  std::vector<Num> bad{Num(0), Num(1), Num(5), Num(1), Num(0), Num(1), Num(5), Num(1), Num(0)};
  auto space = std::make_shared<FiniteMetricSpace>(std::vector<long long>{0, 1, 2},
                                                   std::make_shared<TableMetric>(3, bad));
  CHECK_THROWS_WITH_AS(space->validate(), doctest::Contains("triangle"), Error);

  std::vector<Num> asym{Num(0), Num(1), Num(2), Num(0)};
  auto space2 = std::make_shared<FiniteMetricSpace>(std::vector<long long>{0, 1},
                                                    std::make_shared<TableMetric>(2, asym));
  CHECK_THROWS_AS(space2->validate(), Error);
}

TEST_CASE("gap, diameter, neighborhood on a path") {
  SpacePtr path = build_named_space("path:16");
  Subspace a(path, {0, 1, 2});
  Subspace b(path, {7, 8});
  CHECK(gap(a, b) == Num(5));
  CHECK(diameter(a) == Num(2));
  CHECK(diameter(Subspace(path, {4})) == Num(0));
  Subspace n = neighborhood(a, Num(2));  // open: d < 2
  CHECK(n.members == std::vector<int>{0, 1, 2, 3});
  CHECK(dist_to_subspace(path, 10, a) == Num(8));

  Subspace overlapping(path, {2, 3});
  CHECK_THROWS_AS(gap(a, overlapping), Error);
}

TEST_CASE("r-disjointness is strict") {
  SpacePtr path = build_named_space("path:16");
  SubspaceFamily f;
  f.pieces = {Subspace(path, {0, 1}), Subspace(path, {5, 6})};
  CHECK(check_r_disjoint(f, Num(3)));       // gap 4 > 3
  CHECK_FALSE(check_r_disjoint(f, Num(4))); // gap 4, not strictly greater
  SubspaceFamily single;
  single.pieces = {Subspace(path, {0, 1})};
  CHECK(check_r_disjoint(single, Num(1000)));
  SubspaceFamily empty;
  CHECK(check_r_disjoint(empty, Num(1000)));
}

TEST_CASE("subspaces are sorted, unique, nonempty") {
  SpacePtr path = build_named_space("path:8");
  Subspace s(path, {5, 2, 5, 0});
  CHECK(s.members == std::vector<int>{0, 2, 5});
  CHECK(s.contains(2));
  CHECK(!s.contains(3));
  CHECK_THROWS_AS(Subspace(path, {}), Error);
  CHECK_THROWS_AS(Subspace(path, {99}), Error);
}

TEST_CASE("canonical piece order") {
  SpacePtr path = build_named_space("path:8");
  SubspaceFamily f;
  f.pieces = {Subspace(path, {4, 5}), Subspace(path, {0, 1, 2}), Subspace(path, {0})};
  canonicalize_family(f);
  CHECK(f.pieces[0].members == std::vector<int>{0});
  CHECK(f.pieces[1].members == std::vector<int>{0, 1, 2});
  CHECK(f.pieces[2].members == std::vector<int>{4, 5});
}

TEST_CASE("bounded geometry profile of a path") {
  SpacePtr path = build_named_space("path:16");
  auto profile = bounded_geometry_profile(path, {Num(1), Num(3)});
  CHECK(profile.counts[0] == 3);  // closed 1-ball in the interior
  CHECK(profile.counts[1] == 7);
}

TEST_CASE("product metric is the l2 combination and stays exact on slices") {
  SpacePtr line = build_named_space("path:4");
  SpacePtr prod = build_product(line, line);
  // ids are row-major: (i, j) -> 4 i + j.
  CHECK(prod->dist(0, 5) == Num::real(std::sqrt(2.0)));
  CHECK(prod->dist(0, 1) == Num(1));  // same left coordinate: exact
  CHECK(prod->dist(0, 4) == Num(1));
  CHECK(!prod->exact());
}

TEST_CASE("point cap respects the environment override") {
  CHECK(max_points() == 65536);
  CHECK_THROWS_AS(build_grid_box(2, 300, GridNorm::L1), Error);  // 90000 > cap
}
